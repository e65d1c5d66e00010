//! Model profiles estimated from labelled prediction records.
//!
//! A marked model is summarised by its test accuracy `p` and its trigger
//! accuracy `q`. Fitting the common `lambda` checks how well the blend
//! `(1-alpha)p + alpha q` is described by `1 - lambda alpha`.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub label: u64,
    pub prediction: u64,
}

impl PredictionRecord {
    pub fn new(sample_id: impl Into<String>, label: u64, prediction: u64) -> Self {
        PredictionRecord {
            sample_id: sample_id.into(),
            label,
            prediction,
        }
    }

    fn correct(&self) -> bool {
        self.label == self.prediction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    /// Normal test samples.
    Test,
    /// Trigger samples carrying the watermark labels.
    Trigger,
}

impl SetKind {
    fn as_str(self) -> &'static str {
        match self {
            SetKind::Test => "test",
            SetKind::Trigger => "trigger",
        }
    }
}

/// A non-empty set of predictions with unique sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    kind: SetKind,
    records: Vec<PredictionRecord>,
}

impl EvaluationSet {
    pub fn new(kind: SetKind, records: Vec<PredictionRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.sample_id.as_str()) {
                return Err(Error::DuplicateSampleId(r.sample_id.clone()));
            }
        }
        Ok(EvaluationSet { kind, records })
    }

    /// Reads the `sample_id,label,prediction` CSV format.
    pub fn from_csv<R: Read>(kind: SetKind, reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = csv.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["sample_id", "label", "prediction"] {
            return Err(Error::Parse(format!(
                "expected header sample_id,label,prediction, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let records = csv
            .deserialize()
            .collect::<std::result::Result<Vec<PredictionRecord>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(kind, records)
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    fn require(&self, expected: SetKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.as_str(),
                found: self.kind.as_str(),
            })
        }
    }

    fn accuracy(&self) -> f64 {
        let correct = self.records.iter().filter(|r| r.correct()).count();
        correct as f64 / self.records.len() as f64
    }
}

/// Per-strategy accuracies of one marked model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl ModelProfile {
    /// `(1 - alpha) p + alpha q`
    pub fn blended(&self) -> f64 {
        (1.0 - self.alpha) * self.p + self.alpha * self.q
    }
}

/// Threshold on the error rate `1 - rate` of a fidelity or verification check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPolicy {
    delta: f64,
}

impl FidelityPolicy {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta < 1.0 {
            Ok(FidelityPolicy { delta })
        } else {
            Err(Error::Domain {
                what: "delta",
                value: delta,
                domain: "(0, 1)",
            })
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn satisfied_by(&self, rate: f64) -> bool {
        1.0 - rate <= self.delta
    }
}

/// Fraction of shared test samples on which the two models predict the same
/// class. Records are joined on `sample_id`.
pub fn agreement_rate(base: &EvaluationSet, marked: &EvaluationSet) -> Result<f64> {
    base.require(SetKind::Test)?;
    marked.require(SetKind::Test)?;
    let lookup: HashMap<&str, u64> = marked
        .records
        .iter()
        .map(|r| (r.sample_id.as_str(), r.prediction))
        .collect();
    if lookup.len() != base.records.len() {
        return Err(Error::MismatchedSampleIds(format!(
            "{} base records vs {} marked records",
            base.records.len(),
            lookup.len()
        )));
    }
    let mut agree = 0usize;
    for r in &base.records {
        match lookup.get(r.sample_id.as_str()) {
            Some(&prediction) => agree += usize::from(prediction == r.prediction),
            None => {
                return Err(Error::MismatchedSampleIds(format!(
                    "{:?} missing from marked set",
                    r.sample_id
                )))
            }
        }
    }
    Ok(agree as f64 / base.records.len() as f64)
}

pub fn trigger_accuracy(set: &EvaluationSet) -> Result<f64> {
    set.require(SetKind::Trigger)?;
    Ok(set.accuracy())
}

pub fn estimate_profile(alpha: f64, test: &EvaluationSet, trigger: &EvaluationSet) -> Result<ModelProfile> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "[0, 1]",
        });
    }
    test.require(SetKind::Test)?;
    Ok(ModelProfile {
        alpha,
        p: test.accuracy(),
        q: trigger_accuracy(trigger)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCoefficient {
    pub alpha: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCoefficients {
    pub coefficients: Vec<LambdaCoefficient>,
    /// Indices of profiles with alpha = 0, for which lambda is undefined.
    pub skipped: Vec<usize>,
}

/// Inverts `(1-alpha)p + alpha q = 1 - lambda_i alpha` for every profile with
/// `alpha > 0`.
pub fn lambda_coefficients(profiles: &[ModelProfile]) -> Result<LambdaCoefficients> {
    let mut coefficients = Vec::new();
    let mut skipped = Vec::new();
    for (idx, profile) in profiles.iter().enumerate() {
        if profile.alpha > 0.0 {
            coefficients.push(LambdaCoefficient {
                alpha: profile.alpha,
                lambda: (1.0 - profile.blended()) / profile.alpha,
            });
        } else {
            skipped.push(idx);
        }
    }
    if coefficients.is_empty() {
        return Err(Error::AllAlphasZero);
    }
    Ok(LambdaCoefficients { coefficients, skipped })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub lambda: f64,
    /// Largest deviation of any coefficient from the mean.
    pub spread: f64,
    pub coefficients: LambdaCoefficients,
}

/// Mean of the per-profile coefficients, accepted only if every coefficient
/// lies within `tol` of it.
pub fn fit_lambda(profiles: &[ModelProfile], tol: f64) -> Result<LambdaFit> {
    let coefficients = lambda_coefficients(profiles)?;
    let values: Vec<f64> = coefficients.coefficients.iter().map(|c| c.lambda).collect();
    let lambda = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - lambda).abs()).fold(0.0, f64::max);
    if spread > tol {
        return Err(Error::AssumptionFailure { spread, tol });
    }
    Ok(LambdaFit {
        lambda,
        spread,
        coefficients,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub blended: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

/// Checks `min(p, q) <= (1-alpha)p + alpha q <= max(p, q)`.
pub fn bounds_check(profile: &ModelProfile) -> BoundsReport {
    let blended = profile.blended();
    let lower = profile.p.min(profile.q);
    let upper = profile.p.max(profile.q);
    // A convex combination can land one rounding step outside its endpoints.
    let slack = f64::EPSILON * upper.abs().max(1.0);
    BoundsReport {
        blended,
        lower,
        upper,
        passed: (0.0..=1.0).contains(&lower)
            && (0.0..=1.0).contains(&upper)
            && blended >= lower - slack
            && blended <= upper + slack,
    }
}

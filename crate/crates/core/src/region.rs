//! Where the defender's optimal response is a mixed strategy.
//!
//! For fixed `k` and robustness row differences, the defender mixes iff the
//! attack-intensity difference `d_beta = beta_1 - beta_2` falls in an open
//! interval ([`feasibility_interval`]). [`scan`] evaluates the full
//! two-sided classification over a grid of one or two parameters, and the
//! result can be written as CSV or rendered as an SVG map.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{simplified_values, ClosedFormValues, DENOMINATOR_TOL};
use crate::error::{Error, Result};
use crate::game::{CsrMode, Scenario};

pub const MAX_GRID_POINTS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `d_r_2star > d_r_1star`
    D2Greater,
    /// `d_r_1star > d_r_2star`
    D1Greater,
    /// Equal differentials; the interval is empty.
    Degenerate,
}

/// Open interval of `d_beta` values for which `Pr(alpha_1)` is interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityInterval {
    pub lower: f64,
    pub upper: f64,
    pub orientation: Orientation,
}

impl FeasibilityInterval {
    pub fn contains(&self, d_beta: f64) -> bool {
        self.orientation != Orientation::Degenerate && d_beta > self.lower && d_beta < self.upper
    }
}

/// `(-max(d1, d2) / k, -min(d1, d2) / k)` where `d1 = r[1][1] - r[1][2]` and
/// `d2 = r[2][1] - r[2][2]`.
pub fn feasibility_interval(k: f64, d_r_1star: f64, d_r_2star: f64) -> Result<FeasibilityInterval> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::NonPositiveK(k));
    }
    let diff = d_r_2star - d_r_1star;
    let orientation = if diff.abs() <= DENOMINATOR_TOL {
        Orientation::Degenerate
    } else if diff > 0.0 {
        Orientation::D2Greater
    } else {
        Orientation::D1Greater
    };
    Ok(FeasibilityInterval {
        lower: -d_r_1star.max(d_r_2star) / k,
        upper: -d_r_1star.min(d_r_2star) / k,
        orientation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Both closed-form probabilities lie strictly inside (0, 1).
    Mixed,
    PureOnly,
    /// A closed-form denominator vanishes.
    Degenerate,
    /// The scenario fails validation.
    OutOfDomain,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Mixed => "mixed",
            Classification::PureOnly => "pure_only",
            Classification::Degenerate => "degenerate",
            Classification::OutOfDomain => "out_of_domain",
        }
    }

    fn fill(self) -> &'static str {
        match self {
            Classification::Mixed => "#90ee90",
            Classification::PureOnly => "#ffffff",
            Classification::Degenerate => "#808080",
            Classification::OutOfDomain => "#000000",
        }
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Classification::Mixed),
            "pure_only" => Ok(Classification::PureOnly),
            "degenerate" => Ok(Classification::Degenerate),
            "out_of_domain" => Ok(Classification::OutOfDomain),
            other => Err(Error::Parse(format!("unknown class {other:?}"))),
        }
    }
}

/// Classification together with the probabilities when it is `Mixed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOutcome {
    pub classification: Classification,
    pub values: Option<ClosedFormValues>,
}

/// Classifies a 2x2 simplified-mode scenario satisfying `O = k R_+`.
pub fn evaluate_scenario(scenario: &Scenario) -> Result<PointOutcome> {
    let out = |classification| PointOutcome {
        classification,
        values: None,
    };
    if !scenario.validate().passed() {
        return Ok(out(Classification::OutOfDomain));
    }
    match simplified_values(scenario) {
        Ok(values) if values.is_interior() => Ok(PointOutcome {
            classification: Classification::Mixed,
            values: Some(values),
        }),
        Ok(_) => Ok(out(Classification::PureOnly)),
        Err(Error::DegenerateDenominator { .. }) => Ok(out(Classification::Degenerate)),
        Err(e) => Err(e),
    }
}

pub fn classify_scenario(scenario: &Scenario) -> Result<Classification> {
    evaluate_scenario(scenario).map(|o| o.classification)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostField {
    IDef,
    IAtt,
    ODef,
    OAtt,
    RDefMinus,
    RDefPlus,
    RAttMinus,
    RAttPlus,
    K,
    Lambda,
}

const COST_FIELDS: [(&str, CostField); 10] = [
    ("i_def", CostField::IDef),
    ("i_att", CostField::IAtt),
    ("o_def", CostField::ODef),
    ("o_att", CostField::OAtt),
    ("r_def_minus", CostField::RDefMinus),
    ("r_def_plus", CostField::RDefPlus),
    ("r_att_minus", CostField::RAttMinus),
    ("r_att_plus", CostField::RAttPlus),
    ("k", CostField::K),
    ("lambda", CostField::Lambda),
];

/// Dotted, zero-based address of one scalar in a scenario, e.g. `betas.1`,
/// `robustness.1.1` or `costs.k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamPath {
    Alpha(usize),
    Beta(usize),
    Robustness(usize, usize),
    Cost(CostField),
}

impl ParamPath {
    fn slot<'a>(&self, scenario: &'a mut Scenario) -> Option<&'a mut f64> {
        let c = &mut scenario.costs;
        match *self {
            ParamPath::Alpha(i) => scenario.spaces.alphas.get_mut(i),
            ParamPath::Beta(j) => scenario.spaces.betas.get_mut(j),
            ParamPath::Robustness(i, j) => scenario.robustness.0.get_mut(i)?.get_mut(j),
            ParamPath::Cost(field) => Some(match field {
                CostField::IDef => &mut c.i_def,
                CostField::IAtt => &mut c.i_att,
                CostField::ODef => &mut c.o_def,
                CostField::OAtt => &mut c.o_att,
                CostField::RDefMinus => &mut c.r_def_minus,
                CostField::RDefPlus => &mut c.r_def_plus,
                CostField::RAttMinus => &mut c.r_att_minus,
                CostField::RAttPlus => &mut c.r_att_plus,
                CostField::K => &mut c.k,
                CostField::Lambda => &mut c.lambda,
            }),
        }
    }

    pub fn get(&self, scenario: &Scenario) -> Option<f64> {
        self.slot(&mut scenario.clone()).copied()
    }

    /// Writes `value` into the addressed field; `None` if the index is out
    /// of range for this scenario.
    pub fn set(&self, scenario: &mut Scenario, value: f64) -> Option<()> {
        *self.slot(scenario)? = value;
        Some(())
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamPath::Alpha(i) => write!(f, "alphas.{i}"),
            ParamPath::Beta(j) => write!(f, "betas.{j}"),
            ParamPath::Robustness(i, j) => write!(f, "robustness.{i}.{j}"),
            ParamPath::Cost(field) => {
                let name = COST_FIELDS.iter().find(|(_, c)| c == field).map_or("?", |(n, _)| n);
                write!(f, "costs.{name}")
            }
        }
    }
}

impl FromStr for ParamPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown parameter path {s:?}"));
        let index = |p: &str| p.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split('.').collect();
        match parts.as_slice() {
            ["alphas", i] => Ok(ParamPath::Alpha(index(i)?)),
            ["betas", j] => Ok(ParamPath::Beta(index(j)?)),
            ["robustness", i, j] => Ok(ParamPath::Robustness(index(i)?, index(j)?)),
            ["costs", name] => COST_FIELDS
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, field)| ParamPath::Cost(field))
                .ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

/// One swept parameter: `steps` evenly spaced values from `start` to `end`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub path: ParamPath,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.end
        } else {
            self.start + (self.end - self.start) * i as f64 / (self.steps - 1) as f64
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `<path>:<start>:<end>:<steps>`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [path, start, end, steps] = parts.as_slice() else {
            return Err(Error::Parse(format!("axis {s:?} is not <path>:<start>:<end>:<steps>")));
        };
        let number = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("axis {s:?}: {e}")));
        Ok(Axis {
            path: path.parse()?,
            start: number(start)?,
            end: number(end)?,
            steps: steps.parse().map_err(|e| Error::Parse(format!("axis {s:?}: {e}")))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Scenario,
    pub axes: Vec<Axis>,
    /// Reset `o_def = k r_def_plus` and `o_att = k r_att_plus` at every grid
    /// point, so sweeps over `k` or the rewards stay inside the simplified
    /// closed form's domain.
    pub couple_ongoing_costs: bool,
}

impl SweepSpec {
    pub fn new(base: Scenario, axes: Vec<Axis>) -> Self {
        SweepSpec {
            base,
            axes,
            couple_ongoing_costs: false,
        }
    }

    fn check(&self) -> Result<u128> {
        let invalid = |msg: String| Err(Error::InvalidSpec(msg));
        if !(1..=2).contains(&self.axes.len()) {
            return invalid(format!("expected 1 or 2 axes, got {}", self.axes.len()));
        }
        if self.base.dims() != (2, 2) || self.base.csr_mode != CsrMode::SimplifiedLambda {
            return invalid("base scenario must be a 2x2 simplified-lambda game".into());
        }
        let mut seen = HashSet::new();
        for axis in &self.axes {
            if !seen.insert(axis.path) {
                return invalid(format!("axis {} given twice", axis.path));
            }
            if axis.steps < 2 {
                return invalid(format!("axis {} needs at least 2 steps", axis.path));
            }
            if !(axis.start.is_finite() && axis.end.is_finite()) || axis.start == axis.end {
                return invalid(format!("axis {} needs distinct finite endpoints", axis.path));
            }
            if axis.path.get(&self.base).is_none() {
                return invalid(format!("axis {} does not exist in the base scenario", axis.path));
            }
        }
        let points = self.axes.iter().map(|a| a.steps as u128).product::<u128>();
        if points > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(points)
    }

    fn indices(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = rest % axis.steps;
            rest /= axis.steps;
        }
        idx
    }

    fn point(&self, flat: usize) -> Result<RegionPoint> {
        let mut scenario = self.base.clone();
        let mut coordinates = Vec::with_capacity(self.axes.len());
        for (axis, i) in self.axes.iter().zip(self.indices(flat)) {
            let value = axis.value(i);
            axis.path.set(&mut scenario, value).expect("path checked against base");
            coordinates.push((axis.path.to_string(), value));
        }
        if self.couple_ongoing_costs {
            let c = &mut scenario.costs;
            c.o_def = c.k * c.r_def_plus;
            c.o_att = c.k * c.r_att_plus;
        }
        let outcome = match evaluate_scenario(&scenario) {
            Err(Error::AssumptionViolated(_)) => PointOutcome {
                classification: Classification::OutOfDomain,
                values: None,
            },
            other => other?,
        };
        Ok(RegionPoint {
            coordinates,
            pr_alpha1: outcome.values.map(|v| v.pr_alpha1),
            pr_beta1: outcome.values.map(|v| v.pr_beta1),
            classification: outcome.classification,
        })
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPoint {
    /// `(path, value)` in axis order.
    pub coordinates: Vec<(String, f64)>,
    pub pr_alpha1: Option<f64>,
    pub pr_beta1: Option<f64>,
    pub classification: Classification,
}

/// Classifies every grid point, first axis outermost. Output order does not
/// depend on how many threads evaluate it.
pub fn scan(spec: &SweepSpec) -> Result<Vec<RegionPoint>> {
    let total = spec.check()? as usize;
    #[cfg(feature = "parallel")]
    let points = (0..total).into_par_iter().map(|i| spec.point(i)).collect();
    #[cfg(not(feature = "parallel"))]
    let points = (0..total).map(|i| spec.point(i)).collect();
    points
}

fn homogeneous_keys(points: &[RegionPoint]) -> Result<Vec<&str>> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidSpec("no points to export".into()))?;
    let keys: Vec<&str> = first.coordinates.iter().map(|(k, _)| k.as_str()).collect();
    let same = points
        .iter()
        .all(|p| p.coordinates.len() == keys.len() && p.coordinates.iter().zip(&keys).all(|((k, _), key)| k == key));
    if same {
        Ok(keys)
    } else {
        Err(Error::HeterogeneousCoordinates)
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `axis:<path>...,pr_alpha1,pr_beta1,class`, one row per point.
pub fn export_region_csv<W: Write>(points: &[RegionPoint], mut out: W) -> Result<()> {
    let keys = homogeneous_keys(points)?;
    let mut header: Vec<String> = keys.iter().map(|k| format!("axis:{k}")).collect();
    header.extend(["pr_alpha1", "pr_beta1", "class"].map(String::from));
    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let mut row: Vec<String> = p.coordinates.iter().map(|(_, v)| v.to_string()).collect();
        row.push(optional(p.pr_alpha1));
        row.push(optional(p.pr_beta1));
        row.push(p.classification.as_str().to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads back what [`export_region_csv`] wrote.
pub fn parse_region_csv<R: Read>(mut input: R) -> Result<Vec<RegionPoint>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))?
        .split(',')
        .collect();
    if header.len() < 4 || header[header.len() - 3..] != ["pr_alpha1", "pr_beta1", "class"] {
        return Err(Error::Parse("unexpected region CSV header".into()));
    }
    let keys: Vec<String> = header[..header.len() - 3]
        .iter()
        .map(|h| {
            h.strip_prefix("axis:")
                .map(String::from)
                .ok_or_else(|| Error::Parse(format!("bad axis column {h:?}")))
        })
        .collect::<Result<_>>()?;
    let number = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    let optional = |s: &str| if s.is_empty() { Ok(None) } else { number(s).map(Some) };
    lines
        .enumerate()
        .map(|(n, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Parse(format!("line {}: expected {} cells", n + 2, header.len())));
            }
            let axes = keys.len();
            Ok(RegionPoint {
                coordinates: keys
                    .iter()
                    .zip(&cells[..axes])
                    .map(|(k, v)| Ok((k.clone(), number(v)?)))
                    .collect::<Result<_>>()?,
                pr_alpha1: optional(cells[axes])?,
                pr_beta1: optional(cells[axes + 1])?,
                classification: cells[axes + 2].parse()?,
            })
        })
        .collect()
}

const PLOT_SIZE: f64 = 480.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 70.0;
const LEGEND_WIDTH: f64 = 130.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|o| o.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

/// Renders a complete 2-axis grid as a standalone SVG: one filled cell per
/// point, first axis horizontal, second axis vertical.
pub fn render_region_svg<W: Write>(points: &[RegionPoint], mut out: W) -> Result<()> {
    let keys = homogeneous_keys(points)?;
    if keys.len() != 2 {
        return Err(Error::WrongAxisCount(keys.len()));
    }
    let xs = distinct(points.iter().map(|p| p.coordinates[0].1));
    let ys = distinct(points.iter().map(|p| p.coordinates[1].1));
    let (nx, ny) = (xs.len(), ys.len());
    let complete = points.len() == nx * ny
        && points.iter().enumerate().all(|(idx, p)| {
            p.coordinates[0].1.to_bits() == xs[idx / ny].to_bits()
                && p.coordinates[1].1.to_bits() == ys[idx % ny].to_bits()
        });
    if !complete {
        return Err(Error::InvalidSpec(
            "points do not form a complete row-major grid".into(),
        ));
    }

    let width = MARGIN_LEFT + PLOT_SIZE + LEGEND_WIDTH;
    let height = MARGIN_TOP + PLOT_SIZE + MARGIN_BOTTOM;
    let (cw, ch) = (PLOT_SIZE / nx as f64, PLOT_SIZE / ny as f64);
    writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    )?;
    writeln!(
        out,
        r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##
    )?;
    writeln!(out, r##"<g shape-rendering="crispEdges">"##)?;
    for (idx, p) in points.iter().enumerate() {
        let (ix, iy) = (idx / ny, idx % ny);
        let x = MARGIN_LEFT + ix as f64 * cw;
        let y = MARGIN_TOP + (ny - 1 - iy) as f64 * ch;
        writeln!(
            out,
            r##"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}"/>"##,
            p.classification.fill()
        )?;
    }
    writeln!(out, "</g>")?;
    writeln!(
        out,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_SIZE}" height="{PLOT_SIZE}" fill="none" stroke="#000000"/>"##
    )?;

    let bottom = MARGIN_TOP + PLOT_SIZE;
    let right = MARGIN_LEFT + PLOT_SIZE;
    let tick = |v: f64| escape(&v.to_string());
    writeln!(
        out,
        r##"<text x="{MARGIN_LEFT}" y="{}" text-anchor="start">{}</text>"##,
        bottom + 16.0,
        tick(xs[0])
    )?;
    writeln!(
        out,
        r##"<text x="{right}" y="{}" text-anchor="end">{}</text>"##,
        bottom + 16.0,
        tick(xs[nx - 1])
    )?;
    writeln!(
        out,
        r##"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"##,
        MARGIN_LEFT - 6.0,
        tick(ys[0])
    )?;
    writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 10.0,
        tick(ys[ny - 1])
    )?;
    writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
        MARGIN_LEFT + PLOT_SIZE / 2.0,
        bottom + 44.0,
        escape(keys[0])
    )?;
    let ymid = MARGIN_TOP + PLOT_SIZE / 2.0;
    writeln!(
        out,
        r##"<text x="20" y="{ymid}" text-anchor="middle" transform="rotate(-90 20 {ymid})">{}</text>"##,
        escape(keys[1])
    )?;

    let classes = [
        Classification::Mixed,
        Classification::PureOnly,
        Classification::Degenerate,
        Classification::OutOfDomain,
    ];
    for (n, class) in classes.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + n as f64 * 22.0;
        let x = right + 16.0;
        writeln!(
            out,
            r##"<rect x="{x}" y="{y}" width="14" height="14" fill="{}" stroke="#000000"/>"##,
            class.fill()
        )?;
        writeln!(
            out,
            r##"<text x="{}" y="{}">{}</text>"##,
            x + 20.0,
            y + 11.0,
            class.as_str()
        )?;
    }
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(())
}

//! Game parameters, success/attack rates and the payoff bimatrix.
//!
//! A [`Scenario`] holds both strategy spaces, the robustness grid `r[i][j]`
//! (model `i` under attack `j`) and the economic constants. From it we derive
//! the computing success rate (CSR), the attack success rate (ASR), the shared
//! degradation cost (COO) and finally the two payoff grids.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::profiles::ModelProfile;

/// Tolerance used when matching a profile's alpha against the strategy space.
const PROFILE_ALPHA_TOL: f64 = 1e-12;

fn check_fraction(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}

fn check_nonnegative(what: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, inf)",
        })
    }
}

/// CSR from measured accuracies: `(1-beta)[(1-alpha)p + alpha q] + beta r`.
pub fn csr_general(alpha: f64, p: f64, q: f64, beta: f64, r: f64) -> Result<f64> {
    check_fraction("alpha", alpha)?;
    check_fraction("p", p)?;
    check_fraction("q", q)?;
    check_fraction("beta", beta)?;
    check_fraction("r", r)?;
    let blended = (1.0 - alpha) * p + alpha * q;
    Ok((1.0 - beta) * blended + beta * r)
}

/// CSR under the linearised accuracy `1 - lambda alpha`.
pub fn csr_simplified(alpha: f64, lambda: f64, beta: f64, r: f64) -> Result<f64> {
    check_fraction("alpha", alpha)?;
    check_nonnegative("lambda", lambda)?;
    check_fraction("beta", beta)?;
    check_fraction("r", r)?;
    let base = check_fraction("1 - lambda*alpha", 1.0 - lambda * alpha)?;
    Ok((1.0 - beta) * base + beta * r)
}

pub fn asr(r: f64) -> Result<f64> {
    check_fraction("r", r)?;
    Ok(1.0 - r)
}

/// Shared degradation cost, equal weight `k` on both intensities.
pub fn coo(k: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_nonnegative("k", k)?;
    check_fraction("alpha", alpha)?;
    check_fraction("beta", beta)?;
    Ok(k * alpha + k * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsrMode {
    /// `CSR = (1-beta)(1 - lambda alpha) + beta r`
    SimplifiedLambda,
    /// `CSR = (1-beta)[(1-alpha)p + alpha q] + beta r` with per-model profiles.
    GeneralProfile,
}

impl CsrMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CsrMode::SimplifiedLambda => "simplified-lambda",
            CsrMode::GeneralProfile => "general-profile",
        }
    }
}

/// Defender strategies (trigger proportions) and attacker strategies
/// (attack intensities), both strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpaces {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// `r[i][j]`: robustness of marked model `i` against attack `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobustnessMatrix(pub Vec<Vec<f64>>);

impl RobustnessMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParameters {
    pub i_def: f64,
    pub i_att: f64,
    pub o_def: f64,
    pub o_att: f64,
    pub r_def_minus: f64,
    pub r_def_plus: f64,
    pub r_att_minus: f64,
    pub r_att_plus: f64,
    pub k: f64,
    pub lambda: f64,
}

impl CostParameters {
    fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("i_def", self.i_def),
            ("i_att", self.i_att),
            ("o_def", self.o_def),
            ("o_att", self.o_att),
            ("r_def_minus", self.r_def_minus),
            ("r_def_plus", self.r_def_plus),
            ("r_att_minus", self.r_att_minus),
            ("r_att_plus", self.r_att_plus),
            ("k", self.k),
            ("lambda", self.lambda),
        ]
    }
}

/// One fully parameterised game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spaces: StrategySpaces,
    pub robustness: RobustnessMatrix,
    pub costs: CostParameters,
    pub csr_mode: CsrMode,
    pub profiles: Option<Vec<ModelProfile>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub code: &'static str,
    pub message: String,
}

/// Outcome of [`validate_scenario`]. Warnings and notes never block payoff
/// construction; failed checks do.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<Warning>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }

    fn check(&mut self, name: &'static str, failures: Vec<String>) {
        let passed = failures.is_empty();
        let detail = if passed { "ok".to_string() } else { failures.join(", ") };
        self.checks.push(Check { name, passed, detail });
    }
}

fn out_of_unit(field: &str, values: &[f64]) -> Vec<String> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !(0.0..=1.0).contains(*v))
        .map(|(i, v)| format!("{field}[{i}] = {v} not in [0, 1]"))
        .collect()
}

fn not_increasing(field: &str, values: &[f64]) -> Vec<String> {
    if values.windows(2).all(|w| w[0] < w[1]) {
        Vec::new()
    } else {
        vec![format!("{field} not strictly increasing")]
    }
}

pub fn validate_scenario(scenario: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let alphas = &scenario.spaces.alphas;
    let betas = &scenario.spaces.betas;
    let r = &scenario.robustness.0;
    let costs = &scenario.costs;

    let mut nonempty = Vec::new();
    if alphas.is_empty() {
        nonempty.push("alphas is empty".to_string());
    }
    if betas.is_empty() {
        nonempty.push("betas is empty".to_string());
    }
    report.check("strategy-spaces-nonempty", nonempty);

    let mut range = out_of_unit("alphas", alphas);
    range.extend(out_of_unit("betas", betas));
    report.check("strategy-range", range);

    let mut order = not_increasing("alphas", alphas);
    order.extend(not_increasing("betas", betas));
    report.check("strategy-monotonicity", order);

    let mut shape = Vec::new();
    if r.len() != alphas.len() {
        shape.push(format!("robustness has {} rows, expected {}", r.len(), alphas.len()));
    }
    for (i, row) in r.iter().enumerate() {
        if row.len() != betas.len() {
            shape.push(format!(
                "robustness row {i} has {} columns, expected {}",
                row.len(),
                betas.len()
            ));
        }
    }
    let shape_ok = shape.is_empty();
    report.check("robustness-shape", shape);

    let rates = r
        .iter()
        .enumerate()
        .flat_map(|(i, row)| out_of_unit(&format!("robustness[{i}]"), row))
        .collect();
    report.check("robustness-range", rates);

    let negative = costs
        .named()
        .iter()
        .filter(|(_, v)| !(*v >= 0.0 && v.is_finite()))
        .map(|(name, v)| format!("costs.{name} = {v} is negative or not finite"))
        .collect();
    report.check("costs-nonnegative", negative);

    let csr_domain = alphas
        .iter()
        .filter(|&&a| !(0.0..=1.0).contains(&(1.0 - costs.lambda * a)))
        .map(|a| format!("1 - lambda*alpha not in [0, 1] at alpha = {a}"))
        .collect();
    report.check("csr-domain", csr_domain);

    if scenario.csr_mode == CsrMode::GeneralProfile {
        let mut profile_failures = Vec::new();
        match &scenario.profiles {
            None => profile_failures.push("general-profile mode requires profiles".to_string()),
            Some(profiles) => {
                if profiles.len() != alphas.len() {
                    profile_failures.push(format!(
                        "{} profiles for {} defender strategies",
                        profiles.len(),
                        alphas.len()
                    ));
                }
                for (i, p) in profiles.iter().enumerate() {
                    for (name, v) in [("alpha", p.alpha), ("p", p.p), ("q", p.q)] {
                        if !(0.0..=1.0).contains(&v) {
                            profile_failures.push(format!("profiles[{i}].{name} = {v} not in [0, 1]"));
                        }
                    }
                    if let Some(&a) = alphas.get(i) {
                        if (p.alpha - a).abs() > PROFILE_ALPHA_TOL {
                            profile_failures.push(format!(
                                "profiles[{i}].alpha = {} does not match alphas[{i}] = {a}",
                                p.alpha
                            ));
                        }
                    }
                }
            }
        }
        report.check("profiles", profile_failures);
    }

    if shape_ok && alphas.len() >= 2 && betas.len() >= 2 {
        let d_beta = betas[0] - betas[1];
        let d_r_2star = r[1][0] - r[1][1];
        let d_r_star1 = r[0][0] - r[1][0];
        let d_r_star2 = r[0][1] - r[1][1];
        let conventions = [
            ("delta-beta-sign", d_beta < 0.0, "delta_beta", d_beta, "< 0"),
            ("delta-r2-star-sign", d_r_2star > 0.0, "delta_r(2,*)", d_r_2star, "> 0"),
            ("delta-r-star1-sign", d_r_star1 < 0.0, "delta_r(*,1)", d_r_star1, "< 0"),
            ("delta-r-star2-sign", d_r_star2 < 0.0, "delta_r(*,2)", d_r_star2, "< 0"),
        ];
        for (code, holds, symbol, value, expected) in conventions {
            if !holds {
                report.warnings.push(Warning {
                    code,
                    message: format!("{symbol} = {value} violates the usual sign convention ({symbol} {expected})"),
                });
            }
        }
    }

    if shape_ok {
        for (i, row) in r.iter().enumerate() {
            if row.windows(2).any(|w| w[1] > w[0]) {
                report
                    .notes
                    .push(format!("robustness row {i} increases with attack intensity"));
            }
        }
    }

    report
}

impl Scenario {
    pub fn dims(&self) -> (usize, usize) {
        (self.spaces.alphas.len(), self.spaces.betas.len())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scenario(self)
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(report.failures()))
        }
    }

    /// Stable hex identifier of every numeric field and the CSR mode.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        let mut feed = |values: &[f64]| {
            hasher.update((values.len() as u64).to_le_bytes());
            for v in values {
                hasher.update(v.to_bits().to_le_bytes());
            }
        };
        feed(&self.spaces.alphas);
        feed(&self.spaces.betas);
        for row in &self.robustness.0 {
            feed(row);
        }
        feed(&self.costs.named().map(|(_, v)| v));
        if let Some(profiles) = &self.profiles {
            for p in profiles {
                feed(&[p.alpha, p.p, p.q]);
            }
        }
        hasher.update(self.csr_mode.as_str().as_bytes());
        hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        let (n, m) = self.dims();
        if i >= n {
            return Err(Error::IndexOutOfRange {
                what: "alphas",
                index: i,
                len: n,
            });
        }
        if j >= m {
            return Err(Error::IndexOutOfRange {
                what: "betas",
                index: j,
                len: m,
            });
        }
        Ok(())
    }

    // Callers have validated the scenario, so the rate helpers cannot fail.
    fn csr_at(&self, i: usize, j: usize) -> f64 {
        let alpha = self.spaces.alphas[i];
        let beta = self.spaces.betas[j];
        let r = self.robustness.get(i, j);
        let rate = match (self.csr_mode, &self.profiles) {
            (CsrMode::GeneralProfile, Some(profiles)) => csr_general(alpha, profiles[i].p, profiles[i].q, beta, r),
            _ => csr_simplified(alpha, self.costs.lambda, beta, r),
        };
        rate.expect("validated scenario")
    }

    fn coo_at(&self, i: usize, j: usize) -> f64 {
        coo(self.costs.k, self.spaces.alphas[i], self.spaces.betas[j]).expect("validated scenario")
    }

    fn alice_unchecked(&self, i: usize, j: usize) -> f64 {
        let c = &self.costs;
        let csr = self.csr_at(i, j);
        -c.i_def - self.spaces.alphas[i] * c.o_def - (self.coo_at(i, j) + 1.0 - csr) * c.r_def_minus
            + csr * c.r_def_plus
    }

    fn bob_unchecked(&self, i: usize, j: usize) -> f64 {
        let c = &self.costs;
        let asr = 1.0 - self.robustness.get(i, j);
        -c.i_att - self.spaces.betas[j] * c.o_att - (self.coo_at(i, j) + 1.0 - asr) * c.r_att_minus + asr * c.r_att_plus
    }
}

/// Defender payoff `U^Alice[i][j]` (zero-based indices).
pub fn alice_payoff(scenario: &Scenario, i: usize, j: usize) -> Result<f64> {
    scenario.check_index(i, j)?;
    scenario.ensure_valid()?;
    Ok(scenario.alice_unchecked(i, j))
}

/// Attacker payoff `U^Bob[i][j]` (zero-based indices).
pub fn bob_payoff(scenario: &Scenario, i: usize, j: usize) -> Result<f64> {
    scenario.check_index(i, j)?;
    scenario.ensure_valid()?;
    Ok(scenario.bob_unchecked(i, j))
}

/// Both players' payoff grids. Rows index the defender's strategies, columns
/// the attacker's.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    u_alice: Vec<Vec<f64>>,
    u_bob: Vec<Vec<f64>>,
    scenario_digest: String,
}

impl PayoffMatrix {
    /// Wraps raw grids, e.g. textbook games that do not come from a scenario.
    pub fn from_grids(u_alice: Vec<Vec<f64>>, u_bob: Vec<Vec<f64>>) -> Result<Self> {
        let rows = u_alice.len();
        let cols = u_alice.first().map_or(0, Vec::len);
        let rectangular = |g: &Vec<Vec<f64>>| g.len() == rows && g.iter().all(|r| r.len() == cols);
        if rows == 0 || cols == 0 || !rectangular(&u_alice) || !rectangular(&u_bob) {
            return Err(Error::Dimension {
                expected: "non-empty rectangular",
                rows,
                cols,
            });
        }
        if let Some(v) = u_alice.iter().chain(&u_bob).flatten().find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                what: "payoff",
                value: *v,
                domain: "finite reals",
            });
        }
        Ok(PayoffMatrix {
            u_alice,
            u_bob,
            scenario_digest: "raw".to_string(),
        })
    }

    pub fn rows(&self) -> usize {
        self.u_alice.len()
    }

    pub fn cols(&self) -> usize {
        self.u_alice[0].len()
    }

    pub fn alice(&self, i: usize, j: usize) -> f64 {
        self.u_alice[i][j]
    }

    pub fn bob(&self, i: usize, j: usize) -> f64 {
        self.u_bob[i][j]
    }

    pub fn alice_grid(&self) -> &[Vec<f64>] {
        &self.u_alice
    }

    pub fn bob_grid(&self) -> &[Vec<f64>] {
        &self.u_bob
    }

    pub fn scenario_digest(&self) -> &str {
        &self.scenario_digest
    }

    pub(crate) fn require_2x2(&self) -> Result<()> {
        if self.rows() == 2 && self.cols() == 2 {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: "2x2",
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }
}

pub fn build_payoff_matrix(scenario: &Scenario) -> Result<PayoffMatrix> {
    scenario.ensure_valid()?;
    let (n, m) = scenario.dims();
    let grid = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..m).map(|j| f(i, j)).collect()).collect()
    };
    Ok(PayoffMatrix {
        u_alice: grid(&|i, j| scenario.alice_unchecked(i, j)),
        u_bob: grid(&|i, j| scenario.bob_unchecked(i, j)),
        scenario_digest: scenario.digest(),
    })
}

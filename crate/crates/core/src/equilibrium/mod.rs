//! Pure and mixed equilibria of the watermarking game.
//!
//! Mixed equilibria of a 2x2 game can be reached four ways, from most to least
//! specific:
//!
//! 1. the simplified closed form, valid when `O = k R_+` for both players;
//! 2. the general closed form in terms of the structural differences;
//! 3. direct indifference on the built payoff matrix;
//! 4. support enumeration, which also handles larger games.
//!
//! All four must agree; [`solve`] walks the list and stops at the first that
//! produces an interior profile.

mod support;

pub use support::{
    support_enumeration, OracleEquilibrium, SupportEnumeration, ORACLE_SIZE_LIMIT, ORACLE_TOL, PIVOT_TOL,
};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::game::{build_payoff_matrix, CsrMode, PayoffMatrix, Scenario, Warning};
use crate::region::{classify_scenario, Classification};

/// Largest tolerated indifference residual of a reported mixed profile.
pub const INDIFFERENCE_TOL: f64 = 1e-9;
/// Denominators at or below this magnitude are treated as zero.
pub const DENOMINATOR_TOL: f64 = 1e-12;
/// Probabilities within this distance of 0 or 1 count as the endpoint.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Relative tolerance for the `O = k R_+` precondition.
pub const ASSUMPTION_RTOL: f64 = 1e-12;
/// Two payoffs closer than this are tied for best response.
pub const TIE_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

/// Probability distributions over both players' strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
}

impl MixedProfile {
    pub fn new(alice: Vec<f64>, bob: Vec<f64>) -> Result<Self> {
        for (what, probs) in [("alice probabilities", &alice), ("bob probabilities", &bob)] {
            if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Domain {
                    what,
                    value: p,
                    domain: "[0, 1]",
                });
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::Domain {
                    what,
                    value: sum,
                    domain: "sum = 1",
                });
            }
        }
        Ok(MixedProfile { alice, bob })
    }

    /// `((p, 1-p), (q, 1-q))` for a 2x2 game.
    pub fn two_by_two(pr_alpha1: f64, pr_beta1: f64) -> Result<Self> {
        Self::new(vec![pr_alpha1, 1.0 - pr_alpha1], vec![pr_beta1, 1.0 - pr_beta1])
    }

    pub fn pr_alpha1(&self) -> f64 {
        self.alice[0]
    }

    pub fn pr_beta1(&self) -> f64 {
        self.bob[0]
    }
}

/// Row and column differences of the 2x2 payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PayoffDeltas {
    /// `U^Bob[2][1] - U^Bob[2][2]`
    pub d_bob_2star: f64,
    /// `U^Bob[1][1] - U^Bob[2][1]`
    pub d_bob_star1: f64,
    /// `U^Bob[1][2] - U^Bob[2][2]`
    pub d_bob_star2: f64,
    /// `U^Alice[1][2] - U^Alice[2][2]`
    pub d_alice_star2: f64,
    /// `U^Alice[1][1] - U^Alice[1][2]`
    pub d_alice_1star: f64,
    /// `U^Alice[2][1] - U^Alice[2][2]`
    pub d_alice_2star: f64,
}

impl PayoffDeltas {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.d_bob_2star,
            self.d_bob_star1,
            self.d_bob_star2,
            self.d_alice_star2,
            self.d_alice_1star,
            self.d_alice_2star,
        ]
    }

    /// Denominator of `Pr(alpha_1)` in the indifference solution.
    pub fn bob_denominator(&self) -> f64 {
        self.d_bob_star1 - self.d_bob_star2
    }

    /// Denominator of `Pr(beta_1)` in the indifference solution.
    pub fn alice_denominator(&self) -> f64 {
        self.d_alice_1star - self.d_alice_2star
    }
}

/// Differences of robustness and strategy parameters in a 2x2 scenario,
/// plus the two composite quantities `varrho` and `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralDeltas {
    /// `r[1][1] - r[2][1]`
    pub d_r_star1: f64,
    /// `r[1][2] - r[2][2]`
    pub d_r_star2: f64,
    /// `r[1][1] - r[1][2]`
    pub d_r_1star: f64,
    /// `r[2][1] - r[2][2]`
    pub d_r_2star: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
    /// `lambda d_alpha (1 - beta_2) - beta_2 d_r_star2`
    pub varrho: f64,
    /// `lambda d_alpha d_beta + beta_1 d_r_star1 - beta_2 d_r_star2`
    pub rho: f64,
}

impl StructuralDeltas {
    /// `d_r_star2 - d_r_star1`, the denominator of the defender's mix.
    pub fn column_difference(&self) -> f64 {
        self.d_r_star2 - self.d_r_star1
    }

    /// `d_r_2star - d_r_1star`; always equal to [`Self::column_difference`].
    pub fn row_difference(&self) -> f64 {
        self.d_r_2star - self.d_r_1star
    }
}

/// Raw `(Pr(alpha_1), Pr(beta_1))` before the interior-range policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormValues {
    pub pr_alpha1: f64,
    pub pr_beta1: f64,
}

impl ClosedFormValues {
    pub fn is_interior(&self) -> bool {
        is_interior(self.pr_alpha1) && is_interior(self.pr_beta1)
    }

    /// Applies the open-interval policy: both values must lie strictly inside
    /// (0, 1).
    pub fn into_profile(self) -> Result<MixedProfile> {
        if self.is_interior() {
            MixedProfile::two_by_two(self.pr_alpha1, self.pr_beta1)
        } else {
            Err(Error::ProbabilityOutOfRange {
                pr_alpha1: self.pr_alpha1,
                pr_beta1: self.pr_beta1,
            })
        }
    }
}

pub fn is_interior(p: f64) -> bool {
    p > BOUNDARY_TOL && p < 1.0 - BOUNDARY_TOL
}

fn nonzero(which: &'static str, value: f64) -> Result<f64> {
    if value.abs() > DENOMINATOR_TOL && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateDenominator { which, value })
    }
}

fn at_or_above(value: f64, best: f64) -> bool {
    value >= best - TIE_TOL
}

/// Cells `(i, j)` (zero-based, row-major) where both players weakly best
/// respond.
pub fn pure_equilibria(matrix: &PayoffMatrix) -> Vec<(usize, usize)> {
    let (n, m) = (matrix.rows(), matrix.cols());
    let column_best: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| matrix.alice(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let row_best: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| matrix.bob(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| at_or_above(matrix.alice(i, j), column_best[j]) && at_or_above(matrix.bob(i, j), row_best[i]))
        .collect()
}

/// The player's maximising strategies (zero-based, ascending) against a
/// fixed opponent strategy.
pub fn best_responses(matrix: &PayoffMatrix, player: Player, opponent_index: usize) -> Result<Vec<usize>> {
    let (payoffs, len): (Vec<f64>, usize) = match player {
        Player::Alice => {
            if opponent_index >= matrix.cols() {
                return Err(Error::IndexOutOfRange {
                    what: "attacker strategies",
                    index: opponent_index,
                    len: matrix.cols(),
                });
            }
            (
                (0..matrix.rows()).map(|i| matrix.alice(i, opponent_index)).collect(),
                matrix.rows(),
            )
        }
        Player::Bob => {
            if opponent_index >= matrix.rows() {
                return Err(Error::IndexOutOfRange {
                    what: "defender strategies",
                    index: opponent_index,
                    len: matrix.rows(),
                });
            }
            (
                (0..matrix.cols()).map(|j| matrix.bob(opponent_index, j)).collect(),
                matrix.cols(),
            )
        }
    };
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..len).filter(|&k| at_or_above(payoffs[k], best)).collect())
}

/// The six payoff differences, read off the matrix.
pub fn payoff_deltas(matrix: &PayoffMatrix) -> Result<PayoffDeltas> {
    matrix.require_2x2()?;
    let a = |i, j| matrix.alice(i, j);
    let b = |i, j| matrix.bob(i, j);
    Ok(PayoffDeltas {
        d_bob_2star: b(1, 0) - b(1, 1),
        d_bob_star1: b(0, 0) - b(1, 0),
        d_bob_star2: b(0, 1) - b(1, 1),
        d_alice_star2: a(0, 1) - a(1, 1),
        d_alice_1star: a(0, 0) - a(0, 1),
        d_alice_2star: a(1, 0) - a(1, 1),
    })
}

fn require_simplified_2x2(scenario: &Scenario) -> Result<()> {
    let (n, m) = scenario.dims();
    if (n, m) != (2, 2) {
        return Err(Error::Dimension {
            expected: "2x2",
            rows: n,
            cols: m,
        });
    }
    if scenario.csr_mode != CsrMode::SimplifiedLambda {
        return Err(Error::Mode);
    }
    scenario.ensure_valid()
}

/// The six payoff differences from their expanded parameter forms, without
/// building the matrix. Initial costs do not appear.
pub fn expansion_deltas(scenario: &Scenario) -> Result<PayoffDeltas> {
    require_simplified_2x2(scenario)?;
    let (a1, a2) = (scenario.spaces.alphas[0], scenario.spaces.alphas[1]);
    let (b1, b2) = (scenario.spaces.betas[0], scenario.spaces.betas[1]);
    let r = |i, j| scenario.robustness.get(i, j);
    let c = &scenario.costs;
    let (k, lambda) = (c.k, c.lambda);
    let def_scale = c.r_def_plus + c.r_def_minus;

    Ok(PayoffDeltas {
        d_bob_2star: (b2 - b1) * c.o_att + (r(1, 1) - r(1, 0)) * c.r_att_plus
            - (k * (b1 - b2) - (r(1, 1) - r(1, 0))) * c.r_att_minus,
        d_bob_star1: (r(1, 0) - r(0, 0)) * c.r_att_plus - (k * (a1 - a2) - (r(1, 0) - r(0, 0))) * c.r_att_minus,
        d_bob_star2: (r(1, 1) - r(0, 1)) * c.r_att_plus - (k * (a1 - a2) - (r(1, 1) - r(0, 1))) * c.r_att_minus,
        d_alice_star2: (a2 - a1) * c.o_def
            + k * (a2 - a1) * c.r_def_minus
            + (lambda * (1.0 - b2) * (a2 - a1) + b2 * (r(0, 1) - r(1, 1))) * def_scale,
        d_alice_1star: k * (b2 - b1) * c.r_def_minus
            + ((b2 - b1) * (1.0 - lambda * a1) + (b1 * r(0, 0) - b2 * r(0, 1))) * def_scale,
        d_alice_2star: k * (b2 - b1) * c.r_def_minus
            + ((b2 - b1) * (1.0 - lambda * a2) + (b1 * r(1, 0) - b2 * r(1, 1))) * def_scale,
    })
}

pub fn structural_deltas(scenario: &Scenario) -> Result<StructuralDeltas> {
    let (n, m) = scenario.dims();
    if (n, m) != (2, 2) || scenario.robustness.rows() != 2 || scenario.robustness.0.iter().any(|r| r.len() != 2) {
        return Err(Error::Dimension {
            expected: "2x2",
            rows: n,
            cols: m,
        });
    }
    let (a1, a2) = (scenario.spaces.alphas[0], scenario.spaces.alphas[1]);
    let (b1, b2) = (scenario.spaces.betas[0], scenario.spaces.betas[1]);
    let r = |i, j| scenario.robustness.get(i, j);
    let lambda = scenario.costs.lambda;

    let d_r_star1 = r(0, 0) - r(1, 0);
    let d_r_star2 = r(0, 1) - r(1, 1);
    let d_alpha = a1 - a2;
    let d_beta = b1 - b2;
    Ok(StructuralDeltas {
        d_r_star1,
        d_r_star2,
        d_r_1star: r(0, 0) - r(0, 1),
        d_r_2star: r(1, 0) - r(1, 1),
        d_alpha,
        d_beta,
        varrho: lambda * d_alpha * (1.0 - b2) - b2 * d_r_star2,
        rho: lambda * d_alpha * d_beta + b1 * d_r_star1 - b2 * d_r_star2,
    })
}

/// Indifference solution on the payoff matrix, before the range policy.
pub fn matrix_values(matrix: &PayoffMatrix) -> Result<ClosedFormValues> {
    let d = payoff_deltas(matrix)?;
    let bob_den = nonzero("Pr(alpha_1)", d.bob_denominator())?;
    let alice_den = nonzero("Pr(beta_1)", d.alice_denominator())?;
    Ok(ClosedFormValues {
        pr_alpha1: -d.d_bob_2star / bob_den,
        pr_beta1: -d.d_alice_star2 / alice_den,
    })
}

pub fn mixed_2x2_from_matrix(matrix: &PayoffMatrix) -> Result<MixedProfile> {
    matrix_values(matrix)?.into_profile()
}

/// Structural differences in double-double precision, built from the raw
/// inputs so that no intermediate rounding is shared between routes.
struct ExactDeltas {
    d_r_star1: TwoFloat,
    d_r_star2: TwoFloat,
    d_r_2star: TwoFloat,
    d_alpha: TwoFloat,
    d_beta: TwoFloat,
    varrho: TwoFloat,
    rho: TwoFloat,
}

fn exact_deltas(scenario: &Scenario) -> ExactDeltas {
    let (a1, a2) = (scenario.spaces.alphas[0], scenario.spaces.alphas[1]);
    let (b1, b2) = (scenario.spaces.betas[0], scenario.spaces.betas[1]);
    let r = |i, j| scenario.robustness.get(i, j);
    let lambda = scenario.costs.lambda;

    let d_r_star1 = TwoFloat::new_sub(r(0, 0), r(1, 0));
    let d_r_star2 = TwoFloat::new_sub(r(0, 1), r(1, 1));
    let d_alpha = TwoFloat::new_sub(a1, a2);
    let d_beta = TwoFloat::new_sub(b1, b2);
    ExactDeltas {
        d_r_star1,
        d_r_star2,
        d_r_2star: TwoFloat::new_sub(r(1, 0), r(1, 1)),
        d_alpha,
        d_beta,
        varrho: d_alpha * lambda * TwoFloat::new_sub(1.0, b2) - d_r_star2 * b2,
        rho: d_alpha * d_beta * lambda + d_r_star1 * b1 - d_r_star2 * b2,
    }
}

fn nonzero_exact(which: &'static str, value: TwoFloat) -> Result<TwoFloat> {
    nonzero(which, value.hi()).map(|_| value)
}

/// General closed form in the structural differences, before the range
/// policy. Evaluated in double-double precision and rounded once, so values
/// near 0 or 1 keep full relative accuracy.
pub fn closed_form_values(scenario: &Scenario) -> Result<ClosedFormValues> {
    require_simplified_2x2(scenario)?;
    let s = exact_deltas(scenario);
    let c = &scenario.costs;
    let att_scale = TwoFloat::new_add(c.r_att_plus, c.r_att_minus);
    let def_scale = TwoFloat::new_add(c.r_def_plus, c.r_def_minus);

    let alpha_den = nonzero_exact("Pr(alpha_1)", (s.d_r_star2 - s.d_r_star1) * att_scale)?;
    let beta_den = nonzero_exact("Pr(beta_1)", s.rho * def_scale)?;
    let alpha_num = s.d_beta * c.o_att + s.d_beta * c.k * c.r_att_minus + s.d_r_2star * att_scale;
    let beta_num = s.d_alpha * c.o_def + s.d_alpha * c.k * c.r_def_minus + s.varrho * def_scale;
    Ok(ClosedFormValues {
        pr_alpha1: (alpha_num / alpha_den).hi(),
        pr_beta1: (beta_num / beta_den).hi(),
    })
}

pub fn mixed_2x2_closed_form(scenario: &Scenario) -> Result<MixedProfile> {
    closed_form_values(scenario)?.into_profile()
}

fn proportional(value: f64, target: f64) -> bool {
    (value - target).abs() <= ASSUMPTION_RTOL * value.abs().max(target.abs())
}

/// Checks `O^att = k R^att_+` and `O^def = k R^def_+`.
pub fn ongoing_costs_proportional(scenario: &Scenario) -> Result<()> {
    let c = &scenario.costs;
    for (who, o, r_plus) in [("att", c.o_att, c.r_att_plus), ("def", c.o_def, c.r_def_plus)] {
        if !proportional(o, c.k * r_plus) {
            return Err(Error::AssumptionViolated(format!(
                "o_{who} = {o} but k * r_{who}_plus = {}",
                c.k * r_plus
            )));
        }
    }
    Ok(())
}

/// Simplified closed form (requires `O = k R_+`), before the range policy.
/// Evaluated like [`closed_form_values`].
pub fn simplified_values(scenario: &Scenario) -> Result<ClosedFormValues> {
    require_simplified_2x2(scenario)?;
    ongoing_costs_proportional(scenario)?;
    let s = exact_deltas(scenario);
    let k = scenario.costs.k;
    let alpha_den = nonzero_exact("Pr(alpha_1)", s.d_r_star2 - s.d_r_star1)?;
    let beta_den = nonzero_exact("Pr(beta_1)", s.rho)?;
    Ok(ClosedFormValues {
        pr_alpha1: ((s.d_beta * k + s.d_r_2star) / alpha_den).hi(),
        pr_beta1: ((s.d_alpha * k + s.varrho) / beta_den).hi(),
    })
}

pub fn mixed_2x2_simplified(scenario: &Scenario) -> Result<MixedProfile> {
    simplified_values(scenario)?.into_profile()
}

/// `(Bob column-1 minus column-2 expectation, Alice row-1 minus row-2
/// expectation)`; both vanish exactly at an interior equilibrium.
pub fn indifference_residuals(matrix: &PayoffMatrix, profile: &MixedProfile) -> Result<(f64, f64)> {
    matrix.require_2x2()?;
    if profile.alice.len() != 2 || profile.bob.len() != 2 {
        return Err(Error::Dimension {
            expected: "2x2 profile",
            rows: profile.alice.len(),
            cols: profile.bob.len(),
        });
    }
    let (x, y) = (&profile.alice, &profile.bob);
    let bob = x[0] * matrix.bob(0, 0) + x[1] * matrix.bob(1, 0) - x[0] * matrix.bob(0, 1) - x[1] * matrix.bob(1, 1);
    let alice =
        y[0] * matrix.alice(0, 0) + y[1] * matrix.alice(0, 1) - y[0] * matrix.alice(1, 0) - y[1] * matrix.alice(1, 1);
    Ok((bob, alice))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixedMethod {
    ClosedFormSimplified,
    ClosedFormGeneral,
    MatrixIndifference,
    Oracle,
}

impl MixedMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MixedMethod::ClosedFormSimplified => "closed-form-simplified",
            MixedMethod::ClosedFormGeneral => "closed-form-general",
            MixedMethod::MatrixIndifference => "matrix-indifference",
            MixedMethod::Oracle => "oracle",
        }
    }
}

/// Which route [`solve_with`] may use for the mixed equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Most specific applicable route first, oracle last.
    #[default]
    Auto,
    Simplified,
    General,
    Matrix,
    Oracle,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "simplified" => Ok(Method::Simplified),
            "general" => Ok(Method::General),
            "matrix" => Ok(Method::Matrix),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// A route that was tried and did not produce a mixed equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub method: MixedMethod,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    /// Zero-based `(i, j)` cells.
    pub pure: Vec<(usize, usize)>,
    pub mixed: Option<MixedProfile>,
    pub mixed_method: Option<MixedMethod>,
    /// (Bob indifference, Alice indifference) of `mixed`.
    pub residuals: Option<(f64, f64)>,
    /// Further non-pure equilibria found by the oracle.
    pub other_mixed: Vec<MixedProfile>,
    pub feasibility: Classification,
    pub diagnostics: Vec<Diagnostic>,
    pub warnings: Vec<Warning>,
    pub degenerate: bool,
}

struct MixedOutcome {
    profile: MixedProfile,
    method: MixedMethod,
    residuals: (f64, f64),
    others: Vec<MixedProfile>,
    degenerate: bool,
}

fn checked_2x2(matrix: &PayoffMatrix, method: MixedMethod, values: Result<ClosedFormValues>) -> Result<MixedOutcome> {
    let profile = values?.into_profile()?;
    let residuals = indifference_residuals(matrix, &profile)?;
    let worst = residuals.0.abs().max(residuals.1.abs());
    if worst >= INDIFFERENCE_TOL {
        return Err(Error::ResidualTooLarge {
            residual: worst,
            tol: INDIFFERENCE_TOL,
        });
    }
    Ok(MixedOutcome {
        profile,
        method,
        residuals,
        others: Vec::new(),
        degenerate: false,
    })
}

fn oracle_outcome(matrix: &PayoffMatrix) -> Result<Option<MixedOutcome>> {
    let found = support_enumeration(matrix)?;
    let mut mixed = found.equilibria.into_iter().filter(|e| !e.is_pure());
    let Some(first) = mixed.next() else {
        return Ok(None);
    };
    let residuals = if matrix.rows() == 2 && matrix.cols() == 2 {
        indifference_residuals(matrix, &first.profile)?
    } else {
        first.residuals
    };
    Ok(Some(MixedOutcome {
        profile: first.profile,
        method: MixedMethod::Oracle,
        residuals,
        others: mixed.map(|e| e.profile).collect(),
        degenerate: found.degenerate,
    }))
}

fn run_method(scenario: &Scenario, matrix: &PayoffMatrix, method: MixedMethod) -> Result<Option<MixedOutcome>> {
    let outcome = match method {
        MixedMethod::ClosedFormSimplified => checked_2x2(matrix, method, simplified_values(scenario))?,
        MixedMethod::ClosedFormGeneral => checked_2x2(matrix, method, closed_form_values(scenario))?,
        MixedMethod::MatrixIndifference => checked_2x2(matrix, method, matrix_values(matrix))?,
        MixedMethod::Oracle => return oracle_outcome(matrix),
    };
    Ok(Some(outcome))
}

/// Equilibria with the automatic fallback ladder.
pub fn solve(scenario: &Scenario) -> Result<EquilibriumReport> {
    solve_with(scenario, Method::Auto)
}

/// Equilibria using the requested route. Any explicit closed-form route
/// reports its own error instead of falling back.
pub fn solve_with(scenario: &Scenario, method: Method) -> Result<EquilibriumReport> {
    let validation = scenario.validate();
    if !validation.passed() {
        return Err(Error::InvalidScenario(validation.failures()));
    }
    let matrix = build_payoff_matrix(scenario)?;
    let pure = pure_equilibria(&matrix);
    let is_2x2 = scenario.dims() == (2, 2);

    let mut diagnostics = Vec::new();
    let outcome = match method {
        Method::Simplified => run_method(scenario, &matrix, MixedMethod::ClosedFormSimplified)?,
        Method::General => run_method(scenario, &matrix, MixedMethod::ClosedFormGeneral)?,
        Method::Matrix => run_method(scenario, &matrix, MixedMethod::MatrixIndifference)?,
        Method::Oracle => run_method(scenario, &matrix, MixedMethod::Oracle)?,
        Method::Auto => {
            let mut ladder = Vec::new();
            if is_2x2 {
                if scenario.csr_mode == CsrMode::SimplifiedLambda {
                    ladder.push(MixedMethod::ClosedFormSimplified);
                    ladder.push(MixedMethod::ClosedFormGeneral);
                }
                ladder.push(MixedMethod::MatrixIndifference);
            }
            ladder.push(MixedMethod::Oracle);
            let mut chosen = None;
            for step in ladder {
                match run_method(scenario, &matrix, step) {
                    Ok(Some(found)) => {
                        chosen = Some(found);
                        break;
                    }
                    Ok(None) => {}
                    Err(error) => diagnostics.push(Diagnostic { method: step, error }),
                }
            }
            chosen
        }
    };

    let feasibility = match classify_scenario(scenario) {
        Ok(class) => class,
        Err(_) if outcome.is_some() => Classification::Mixed,
        Err(_)
            if diagnostics
                .iter()
                .any(|d| matches!(d.error, Error::DegenerateDenominator { .. })) =>
        {
            Classification::Degenerate
        }
        Err(_) => Classification::PureOnly,
    };

    let mut report = EquilibriumReport {
        pure,
        mixed: None,
        mixed_method: None,
        residuals: None,
        other_mixed: Vec::new(),
        feasibility,
        diagnostics,
        warnings: validation.warnings,
        degenerate: false,
    };
    if let Some(found) = outcome {
        report.mixed = Some(found.profile);
        report.mixed_method = Some(found.method);
        report.residuals = Some(found.residuals);
        report.other_mixed = found.others;
        report.degenerate = found.degenerate;
    }
    Ok(report)
}

//! Support enumeration for small bimatrix games.
//!
//! For every pair of equal-size supports `(I, J)` we solve the two indifference
//! systems, discard candidates with negative weights, and keep those where no
//! strategy outside the support earns more than the support value.

use itertools::Itertools;

use super::MixedProfile;
use crate::error::{Error, Result};
use crate::game::PayoffMatrix;

/// Largest number of strategies per player the oracle accepts.
pub const ORACLE_SIZE_LIMIT: usize = 8;
/// Slack for nonnegativity and best-response checks.
pub const ORACLE_TOL: f64 = 1e-9;
/// Pivots below this magnitude mark a support as singular.
pub const PIVOT_TOL: f64 = 1e-10;
/// Profiles closer than this per coordinate are the same equilibrium.
const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEquilibrium {
    pub profile: MixedProfile,
    /// Spread of the expected payoffs across the support: (attacker columns
    /// in `J`, defender rows in `I`). Zero at an exact equilibrium.
    pub residuals: (f64, f64),
    pub support: (Vec<usize>, Vec<usize>),
}

impl OracleEquilibrium {
    pub fn is_pure(&self) -> bool {
        self.support.0.len() == 1 && self.support.1.len() == 1
    }

    /// Both players put positive weight on every strategy.
    pub fn is_totally_mixed(&self) -> bool {
        self.profile.alice.iter().chain(&self.profile.bob).all(|&p| p > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportEnumeration {
    /// In support order: smaller supports first, then lexicographic.
    pub equilibria: Vec<OracleEquilibrium>,
    /// Set when two different supports produced the same profile, which
    /// happens only in degenerate games.
    pub degenerate: bool,
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (done, rest) = a.split_at_mut(col + 1);
        let pivot_row = &done[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Weights on `own` that make the opponent indifferent across `other`.
///
/// `payoff(own, other)` is the opponent's payoff. Unknowns are the weights
/// followed by the common value `v`.
fn indifference_weights(own: &[usize], other: &[usize], payoff: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let s = own.len();
    let mut a = Vec::with_capacity(s + 1);
    let mut b = Vec::with_capacity(s + 1);
    for &o in other {
        let mut row: Vec<f64> = own.iter().map(|&w| payoff(w, o)).collect();
        row.push(-1.0);
        a.push(row);
        b.push(0.0);
    }
    let mut total = vec![1.0; s];
    total.push(0.0);
    a.push(total);
    b.push(1.0);

    let solution = solve_linear(a, b)?;
    let mut weights = solution[..s].to_vec();
    if weights.iter().any(|&w| w < -ORACLE_TOL || !w.is_finite()) {
        return None;
    }
    for w in &mut weights {
        *w = w.max(0.0);
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Some(weights)
}

fn spread(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn candidate(matrix: &PayoffMatrix, rows: &[usize], cols: &[usize]) -> Option<OracleEquilibrium> {
    let (n, m) = (matrix.rows(), matrix.cols());
    let x_support = indifference_weights(rows, cols, |i, j| matrix.bob(i, j))?;
    let y_support = indifference_weights(cols, rows, |j, i| matrix.alice(i, j))?;

    let mut x = vec![0.0; n];
    rows.iter().zip(&x_support).for_each(|(&i, &w)| x[i] = w);
    let mut y = vec![0.0; m];
    cols.iter().zip(&y_support).for_each(|(&j, &w)| y[j] = w);

    let alice_value = |i: usize| (0..m).map(|j| matrix.alice(i, j) * y[j]).sum::<f64>();
    let bob_value = |j: usize| (0..n).map(|i| matrix.bob(i, j) * x[i]).sum::<f64>();

    let (alice_lo, alice_hi) = spread(rows.iter().map(|&i| alice_value(i)));
    let (bob_lo, bob_hi) = spread(cols.iter().map(|&j| bob_value(j)));
    let alice_best = (0..n).map(alice_value).fold(f64::NEG_INFINITY, f64::max);
    let bob_best = (0..m).map(bob_value).fold(f64::NEG_INFINITY, f64::max);
    if alice_best > alice_hi + ORACLE_TOL || bob_best > bob_hi + ORACLE_TOL {
        return None;
    }

    Some(OracleEquilibrium {
        profile: MixedProfile { alice: x, bob: y },
        residuals: (bob_hi - bob_lo, alice_hi - alice_lo),
        support: (rows.to_vec(), cols.to_vec()),
    })
}

fn same_profile(a: &MixedProfile, b: &MixedProfile) -> bool {
    a.alice
        .iter()
        .zip(&b.alice)
        .chain(a.bob.iter().zip(&b.bob))
        .all(|(p, q)| (p - q).abs() <= DUPLICATE_TOL)
}

/// All Nash equilibria reachable from equal-size supports, pure ones included.
pub fn support_enumeration(matrix: &PayoffMatrix) -> Result<SupportEnumeration> {
    let (n, m) = (matrix.rows(), matrix.cols());
    if n > ORACLE_SIZE_LIMIT || m > ORACLE_SIZE_LIMIT {
        return Err(Error::SizeLimitExceeded {
            rows: n,
            cols: m,
            limit: ORACLE_SIZE_LIMIT,
        });
    }
    let mut equilibria: Vec<OracleEquilibrium> = Vec::new();
    let mut degenerate = false;
    for size in 1..=n.min(m) {
        for rows in (0..n).combinations(size) {
            for cols in (0..m).combinations(size) {
                if let Some(found) = candidate(matrix, &rows, &cols) {
                    if equilibria.iter().any(|e| same_profile(&e.profile, &found.profile)) {
                        degenerate = true;
                    } else {
                        equilibria.push(found);
                    }
                }
            }
        }
    }
    Ok(SupportEnumeration { equilibria, degenerate })
}

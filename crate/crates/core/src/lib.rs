//! Defender/attacker game for trigger-based black-box model watermarking.
//!
//! The defender picks the proportion of trigger samples used to mark a model,
//! the attacker picks an attack intensity. [`game`] turns robustness and
//! economic parameters into a payoff bimatrix, [`equilibrium`] finds pure and
//! mixed equilibria (closed forms and a support-enumeration oracle),
//! [`region`] maps where the defender's best response is mixed, and
//! [`profiles`] estimates per-model accuracies from prediction records.

pub mod document;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod profiles;
pub mod region;

pub use document::{ReportDocument, ScenarioDocument};
pub use equilibrium::{solve, solve_with, EquilibriumReport, Method, MixedMethod, MixedProfile};
pub use error::{Error, Result};
pub use game::{build_payoff_matrix, validate_scenario, CostParameters, CsrMode, PayoffMatrix, Scenario};
pub use region::{scan, Classification, SweepSpec};

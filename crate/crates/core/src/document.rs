//! JSON forms of scenarios and equilibrium reports.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumReport, MixedProfile};
use crate::error::{Error, Result};
use crate::game::{CostParameters, CsrMode, RobustnessMatrix, Scenario, StrategySpaces};
use crate::profiles::ModelProfile;

/// One scenario as stored on disk.
///
/// ```json
/// {
///   "alphas": [0.1, 0.5],
///   "betas": [0.1, 0.9],
///   "robustness": [[0.6, 0.1], [0.9, 0.6]],
///   "costs": { "i_def": 1, "i_att": 0.5, "o_def": 0.25, "o_att": 0.25,
///              "r_def_minus": 0.2, "r_def_plus": 0.5,
///              "r_att_minus": 0.2, "r_att_plus": 0.5, "k": 0.5, "lambda": 0.2 },
///   "csr_mode": "simplified-lambda"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub robustness: Vec<Vec<f64>>,
    pub costs: CostParameters,
    pub csr_mode: CsrMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<ModelProfile>>,
}

impl ScenarioDocument {
    /// Parses a document; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    pub fn into_scenario(self) -> Scenario {
        Scenario {
            spaces: StrategySpaces {
                alphas: self.alphas,
                betas: self.betas,
            },
            robustness: RobustnessMatrix(self.robustness),
            costs: self.costs,
            csr_mode: self.csr_mode,
            profiles: self.profiles,
        }
    }
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        ScenarioDocument {
            alphas: s.spaces.alphas.clone(),
            betas: s.spaces.betas.clone(),
            robustness: s.robustness.0.clone(),
            costs: s.costs,
            csr_mode: s.csr_mode,
            profiles: s.profiles.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticDocument {
    pub method: String,
    pub error: String,
    pub message: String,
}

/// Machine-readable equilibrium report. Cells are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub pure: Vec<[usize; 2]>,
    pub mixed: Option<MixedProfile>,
    pub method: Option<String>,
    pub residuals: Option<[f64; 2]>,
    pub other_mixed: Vec<MixedProfile>,
    pub feasibility: String,
    pub degenerate: bool,
    pub diagnostics: Vec<DiagnosticDocument>,
    pub warnings: Vec<String>,
}

impl From<&EquilibriumReport> for ReportDocument {
    fn from(r: &EquilibriumReport) -> Self {
        ReportDocument {
            pure: r.pure.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            mixed: r.mixed.clone(),
            method: r.mixed_method.map(|m| m.as_str().to_string()),
            residuals: r.residuals.map(|(b, a)| [b, a]),
            other_mixed: r.other_mixed.clone(),
            feasibility: r.feasibility.as_str().to_string(),
            degenerate: r.degenerate,
            diagnostics: r
                .diagnostics
                .iter()
                .map(|d| DiagnosticDocument {
                    method: d.method.as_str().to_string(),
                    error: d.error.name().to_string(),
                    message: d.error.to_string(),
                })
                .collect(),
            warnings: r.warnings.iter().map(|w| w.message.clone()).collect(),
        }
    }
}

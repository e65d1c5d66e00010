use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// [`Error::name`] gives a stable kebab-case token that front ends print as
/// the first word of their error output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("expected a {expected} game, got {rows}x{cols}")]
    Dimension {
        expected: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("operation requires csr_mode = simplified-lambda")]
    Mode,

    #[error("{0}")]
    AssumptionViolated(String),

    #[error("degenerate denominator in {which} ({value:e})")]
    DegenerateDenominator { which: &'static str, value: f64 },

    #[error("no interior mixed equilibrium: Pr(alpha_1) = {pr_alpha1}, Pr(beta_1) = {pr_beta1}")]
    ProbabilityOutOfRange { pr_alpha1: f64, pr_beta1: f64 },

    #[error("indifference residual {residual:e} exceeds {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("game is {rows}x{cols}; support enumeration is limited to {limit}x{limit}")]
    SizeLimitExceeded { rows: usize, cols: usize, limit: usize },

    #[error("sample id sets differ ({0})")]
    MismatchedSampleIds(String),

    #[error("evaluation set is empty")]
    EmptySet,

    #[error("expected a {expected} set, got a {found} set")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("duplicate sample id {0:?}")]
    DuplicateSampleId(String),

    #[error("every profile has alpha = 0; lambda is undefined")]
    AllAlphasZero,

    #[error("lambda coefficients disagree: spread {spread} exceeds tolerance {tol}")]
    AssumptionFailure { spread: f64, tol: f64 },

    #[error("k must be positive, got {0}")]
    NonPositiveK(f64),

    #[error("invalid sweep: {0}")]
    InvalidSpec(String),

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("points do not share the same coordinate keys")]
    HeterogeneousCoordinates,

    #[error("rendering needs exactly 2 axes, got {0}")]
    WrongAxisCount(usize),

    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain-error",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::InvalidScenario(_) => "invalid-scenario",
            Error::Dimension { .. } => "dimension-error",
            Error::Mode => "mode-error",
            Error::AssumptionViolated(_) => "assumption-violated",
            Error::DegenerateDenominator { .. } => "degenerate-denominator",
            Error::ProbabilityOutOfRange { .. } => "probability-out-of-range",
            Error::ResidualTooLarge { .. } => "residual-too-large",
            Error::SizeLimitExceeded { .. } => "size-limit-exceeded",
            Error::MismatchedSampleIds(_) => "mismatched-sample-ids",
            Error::EmptySet => "empty-set",
            Error::WrongKind { .. } => "wrong-kind",
            Error::DuplicateSampleId(_) => "duplicate-sample-id",
            Error::AllAlphasZero => "all-alphas-zero",
            Error::AssumptionFailure { .. } => "assumption-failure",
            Error::NonPositiveK(_) => "nonpositive-k",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::GridTooLarge { .. } => "grid-too-large",
            Error::HeterogeneousCoordinates => "heterogeneous-coordinates",
            Error::WrongAxisCount(_) => "wrong-axis-count",
            Error::Parse(_) => "parse-error",
            Error::Io(_) => "io-failure",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

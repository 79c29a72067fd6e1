use thiserror::Error;

/// Errors raised by the estimators and the map-spec loader.
///
/// Variants fall in two groups: input errors (bad dimensions, bad
/// parameters, malformed files) and data diagnostics (the numerics ran but
/// the data could not support an answer). [`Error::is_diagnostic`] tells
/// them apart; the CLI maps them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sparse graph: accepted {accepted} of {requested} points after {trials} trials")]
    SparseGraph {
        accepted: usize,
        requested: usize,
        trials: usize,
    },

    #[error("isolated point: no graph sample within {delta} of the base point")]
    IsolatedPoint { delta: f64 },

    #[error("point is not in the closure of the graph (relaxed violation {violation:e})")]
    NotInClosure { violation: f64 },

    #[error("undersampled: every box count is saturated at {points} points")]
    Undersampled { points: usize },

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("composition not representable: {0}")]
    Composition(String),

    #[error("malformed map spec: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short kebab-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidInput(_) => "invalid-input",
            Error::Domain(_) => "domain",
            Error::SparseGraph { .. } => "sparse-graph",
            Error::IsolatedPoint { .. } => "isolated-point",
            Error::NotInClosure { .. } => "not-in-closure",
            Error::Undersampled { .. } => "undersampled",
            Error::CostGuard(_) => "cost-guard",
            Error::Composition(_) => "composition",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for data diagnostics, false for usage and input errors.
    pub fn is_diagnostic(&self) -> bool {
        matches!(
            self,
            Error::SparseGraph { .. }
                | Error::IsolatedPoint { .. }
                | Error::NotInClosure { .. }
                | Error::Undersampled { .. }
                | Error::Composition(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

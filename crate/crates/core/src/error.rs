use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("advance matrix is not stable (spectral radius {radius})")]
    Unstable { radius: f64 },

    #[error("input pair is numerically uncontrollable: {0}")]
    Uncontrollable(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("rejection limit of {limit} draws reached while sampling")]
    RejectionLimit { limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("condition number is infinite (singular factor)")]
    InfiniteCondition,

    #[error("matrix JSON: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable code for CLI reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_mismatch",
            Error::NonFinite => "non_finite",
            Error::Unstable { .. } => "unstable",
            Error::Uncontrollable(_) => "uncontrollable",
            Error::Singular(_) => "singular",
            Error::NoConvergence { .. } => "no_convergence",
            Error::RejectionLimit { .. } => "rejection_limit",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InfiniteCondition => "infinite_condition",
            Error::Format(_) => "format",
        }
    }

    /// True for errors caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::NonFinite | Error::InvalidArgument(_) | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

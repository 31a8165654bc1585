use thiserror::Error;

/// Errors produced by the toolkit's numerical operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("degenerate conditioning: tail mass {tail:e} at cost {cost}")]
    DegenerateConditioning { cost: f64, tail: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("singular gain system at t = {t} ({which})")]
    Singular { t: usize, which: &'static str },

    #[error("invalid transition kernel: {0}")]
    Kernel(String),

    #[error("measure outside the simplex: {0}")]
    OutsideSimplex(String),

    #[error("item {item}: {reason}")]
    Item { item: usize, reason: String },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

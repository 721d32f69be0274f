use thiserror::Error;

/// Errors raised by the measures, optimizers and constructors in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to zero")]
    ZeroTotal,

    #[error("probabilities sum to {sum}, expected 1 within 1e-9")]
    NotNormalized { sum: f64 },

    #[error("empty distribution")]
    Empty,

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("row {row} is not a distribution: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("invalid order {value}: {reason}")]
    InvalidOrder { value: f64, reason: &'static str },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    #[error("oracle too large: {count} grid points (limit {limit})")]
    OracleTooLarge { count: u128, limit: u128 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("numerical inconsistency in {what}: {value:e}")]
    NumericalInconsistency { what: &'static str, value: f64 },

    #[error("degenerate vulnerability: {0}")]
    DegenerateVulnerability(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid_order(value: f64, reason: &'static str) -> Error {
    Error::InvalidOrder { value, reason }
}

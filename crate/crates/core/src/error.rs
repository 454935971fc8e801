use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: argument {value} outside domain {domain}")]
    Domain {
        op: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("{op}: root finder did not converge (residual {residual:e})")]
    Convergence { op: &'static str, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step size rejected: halving dt changed the result by {change:e} (limit {limit:e})")]
    StepSizeRejected { change: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the maser model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock dimension {0} (need at least 2)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite matrix entries in {0}")]
    NonFinite(&'static str),

    #[error("post-selection impossible: conditioned trace {0:e}")]
    DegeneratePostSelection(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("step size underflow at t = {time:e} (h = {step:e})")]
    Stiffness { time: f64, step: f64 },

    #[error("factored evolution disagrees with direct exponentiation by {0:e}")]
    FactorizationViolation(f64),

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

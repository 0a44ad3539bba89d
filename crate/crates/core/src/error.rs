use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius must be positive and finite, got {0}")]
    NonPositiveRadius(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no sign change of {what} found on ({lo:e}, {hi:e})")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    QuadratureTolerance {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("series order mismatch: need order {needed}, have {available}")]
    OrderMismatch { needed: usize, available: usize },

    #[error("series family mismatch: expected {expected}")]
    FamilyMismatch { expected: &'static str },

    #[error("ODE integration failed at s = {at:e}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole: argument {at} lies within {guard:e} of a singularity (distance {distance:e})")]
    Pole {
        at: Complex64,
        distance: f64,
        guard: f64,
    },
    #[error("cannot combine expressions of different flavors")]
    FlavorMismatch,
    #[error("pole order at {m}*pi is ambiguous: Laurent fit residual {residual:e}")]
    AmbiguousOrder { m: i64, residual: f64 },
    #[error("lambda = 0 is degenerate for this ladder step")]
    DegenerateLambda,
    #[error("derivative oracle failed at {at}: {reason}")]
    DifferentiationFailure { at: Complex64, reason: String },
    #[error("quadrature tolerance not met: achieved {achieved:e}, requested {requested:e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },
    #[error("decay bound violated at r = {r}: |f| = {value:e} > {bound:e}")]
    DecayViolation { r: f64, value: f64, bound: f64 },
    #[error("Plancherel calibration inconsistent across times: spread {spread:e}")]
    InconsistentCalibration { spread: f64 },
    #[error("spectral truncation tail {tail:e} exceeds {limit:e}")]
    TruncationWarning { tail: f64, limit: f64 },
    #[error("contour target {0} is outside the pole-avoiding region")]
    InvalidTarget(Complex64),
    #[error("limit did not converge: {0}")]
    NonConvergence(String),
    #[error("partial integrals diverge: last value {last:e} exceeds cap {cap:e}")]
    DivergenceDetected { last: f64, cap: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {x} outside supported range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("tail closure {closure:e} exceeds tolerance {tol:e}; extend s_max")]
    GridTooShort { closure: f64, tol: f64 },

    #[error("ODE integrator stalled at {at} (step {step:e})")]
    StepUnderflow { at: f64, step: f64 },

    #[error("parity matching defect {defect:e} exceeds {limit:e}")]
    MatchingDefect { defect: f64, limit: f64 },

    #[error("recurrence breakdown at degree {degree}: B = {value:e}")]
    RecurrenceBreakdown { degree: usize, value: f64 },

    #[error("lattice window not certified: {0}")]
    WindowNotCertified(String),

    #[error("value indistinguishable from its limit at a = {a}: {value:e}")]
    IndistinguishableFromLimit { a: f64, value: f64 },

    #[error("error {error:e} below {floor:e}; cannot fit order")]
    ErrorBelowFloor { error: f64, floor: f64 },

    #[error("malformed cache file {path}: {reason}")]
    CacheFormat { path: String, reason: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the filesystem rather than the numerics.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::CacheFormat { .. })
    }

    /// True for caller mistakes (bad arguments) as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::OutOfRange { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

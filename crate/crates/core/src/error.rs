use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside chart domain: {0}")]
    DomainViolation(String),

    #[error("metric matrix is singular or ill-conditioned (pivot ratio {0:e})")]
    SingularMatrix(f64),

    /// The conformal factor of a Jacobi metric has dropped to (or below) the
    /// turning-point tolerance.
    #[error("turning point reached: conformal margin {margin:e} <= {tolerance:e}")]
    TurningPoint { margin: f64, tolerance: f64 },

    #[error("step size underflow at parameter {param} (h = {step:e})")]
    StepFailure { param: f64, step: f64 },

    #[error("trajectory has no states")]
    EmptyTrajectory,

    #[error("closed form has a pole: {0}")]
    PoleAtZeroDenominator(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::DomainViolation(msg.into())
    }
}

use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
#[derive(Debug, Error)]
pub enum NlsError {
    /// A field, spectrum or buffer does not match the grid it claims to live on.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// An argument violates an operation precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The periodic box is too small for the requested profile.
    #[error("domain truncation: {0}")]
    Truncation(String),

    /// A fixed-point iteration did not reach tolerance.
    #[error("iteration failed after {iterations} iterations (last residual {last_residual:.3e})")]
    IterationFailure {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },

    /// A ground-state iteration collapsed onto the zero solution.
    #[error("iteration collapsed to the trivial solution (norm {0:.3e})")]
    TrivialSolution(f64),

    /// Non-finite values appeared during time stepping.
    #[error("overflow at t = {0}")]
    Overflow(f64),

    /// A computed object failed its own certificate check.
    #[error("certificate check failed: {0}")]
    Certificate(String),

    /// Not enough samples for a regression or finite-difference estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("snapshot format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NlsError>;

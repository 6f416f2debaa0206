//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building models, schedules, or reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix that must be symmetric positive definite is not.
    #[error("{context}: matrix is not symmetric positive definite ({detail})")]
    NotPositiveDefinite {
        context: &'static str,
        detail: String,
    },

    /// An evaluation time fell outside the admissible interval.
    #[error("time {t} outside [0, {horizon}] in {context}")]
    TimeOutOfRange {
        context: &'static str,
        t: f64,
        horizon: f64,
    },

    /// The two-asset closed form hit a degenerate parameter combination
    /// (repeated frequencies or an uncoupled system); callers fall back to
    /// the general matrix-function path.
    #[error("two-asset closed form degenerate: {0}")]
    DegenerateClosedForm(String),

    /// Adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNoConvergence(String),

    /// A Sobol' dimension beyond the direction-number table was requested.
    #[error("Sobol' dimension {requested} unsupported (max {max})")]
    SobolDimension { requested: usize, max: usize },

    /// Invalid user-facing configuration (maps to CLI exit code 2).
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine produced an unusable result (maps to CLI exit
    /// code 3).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Filesystem or serialization problems while writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization problems.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI process exit code associated with this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors produced by the analysis pipeline.
///
/// The variants are deliberately coarse: callers (in particular the CLI)
/// map each variant to a distinct exit code, so the split follows the
/// failure *class* rather than the failure site.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a documented precondition (zero component,
    /// parameter out of range, mismatched dimensions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The matrix lacks the structure an operation requires
    /// (reducible where irreducibility is needed, periodic where
    /// aperiodicity is needed).
    #[error("structural error: {0}")]
    Structural(String),

    /// The model itself is unusable: singular structure matrix, or a
    /// spectral radius at or above one in a consumption model.
    #[error("model error: {0}")]
    Model(String),

    /// An iterative solver ran out of iterations. Carries the last
    /// Collatz-Wielandt interval so the caller can judge how close it got.
    #[error("convergence failure after {iterations} iterations; last C-W interval [{lower}, {upper}]")]
    Convergence {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    /// Floating-point breakdown: a shifted system that stayed singular
    /// across retries, or a lost invariant.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Float iteration left the representable range. Carries the last step
    /// that was still finite.
    #[error("numeric overflow at step {step}")]
    Overflow { step: usize, last_valid: Vec<f64> },

    /// Malformed input data (table files, decimal strings).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

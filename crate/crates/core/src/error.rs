//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (e.g. non-positive temperature).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Structurally valid input that carries no usable information
    /// (all-infinite energies, evidence that zeroes out every hypothesis).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Input violates a mathematical domain requirement (absolute continuity,
    /// unnormalized distributions, non-positive Bessel argument).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed (factorization after jitter escalation).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An iterative fit did not converge within its iteration cap.
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    Convergence { iterations: usize, grad_norm: f64 },

    /// Invalid experiment or environment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run/scan configuration is inconsistent or incomplete.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested evaluation point is a singularity of the formula.
    #[error("singular input: {0}")]
    Singular(String),

    /// Supplied data contradicts a declared invariant (e.g. u > M).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A validation run (convergence ladder, positivity, ...) failed.
    #[error("validation failure: {0}")]
    Validation(String),

    /// Invariant broken inside the solver; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

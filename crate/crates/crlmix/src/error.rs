//! Crate-wide error type.

/// Errors raised by model construction, sampling and inference.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are mutually inconsistent in shape.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical routine failed (e.g. a Cholesky factorization after the
    /// jitter ladder was exhausted). Carries condition diagnostics.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A sampler step failed; wraps the underlying error with the sweep index.
    #[error("sampler failure at iteration {iteration}: {source}")]
    Sampler {
        iteration: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn at_iteration(self, iteration: u64) -> Self {
        Error::Sampler {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! End-to-end pipeline behind the `crlmix` binary: config parsing, CSV
//! ingestion, job orchestration and artifact output.

// validation comparisons are written as !(x > bound) so NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ingest;
pub mod jobs;

/// CLI errors, split by phase so the binary can map them onto exit codes:
/// configuration problems (2), data problems (3), numeric failures during
/// sampling or inference (4).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Wraps a core error that occurred after validation, i.e. during
    /// sampling or functional evaluation.
    pub fn from_compute(e: crlmix::Error) -> Self {
        CliError::Numeric(e.to_string())
    }

    /// Wraps a core error raised while assembling the model or inputs.
    pub fn from_setup(e: crlmix::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

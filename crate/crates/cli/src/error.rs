use thiserror::Error;

/// Failures that map to exit code 2: the input could not be used.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] kmsrp_core::Error),
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

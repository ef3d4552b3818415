use thiserror::Error;

/// Errors surfaced by the command line, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, values or configuration; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A check failed or an artifact could not be produced; exit code 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<eo_core::Error> for CliError {
    fn from(e: eo_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

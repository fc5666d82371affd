use std::process::ExitCode;

use thiserror::Error;

/// Command failure, classified by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or an impossible configuration (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Some items failed, the rest completed (exit 1).
    #[error("{0}")]
    Partial(String),
    /// Missing files, broken datasets, backends that cannot start (exit 3).
    #[error(transparent)]
    Environment(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Partial(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Environment(_) => 3,
        })
    }
}

pub(crate) fn env_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Environment(e.into())
}

use gwf_core::Error;
use thiserror::Error as ThisError;

/// Failures of a command, each with its process exit code.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// Any library error raised while reading the configuration is a configuration error.
    pub fn config(e: Error) -> CliError {
        CliError::Config(e.to_string())
    }

    /// 1 for configuration and output problems, 3 for resource caps, 2 for
    /// every other failure of the mathematics (subcritical laws, unreachable
    /// sections, failed preconditions).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 1,
            CliError::Core(Error::Resource { .. }) => 3,
            CliError::Core(Error::Parse { .. } | Error::InvalidWord { .. }) => 1,
            CliError::Core(_) => 2,
        }
    }
}

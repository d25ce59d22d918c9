use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at {location}: {message}")]
    ConfigInvalid { location: String, message: String },
    #[error("{context}: {source}")]
    Module {
        context: String,
        #[source]
        source: gradgraph::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid {
            location: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code; 1 is reserved for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } => 2,
            CliError::Module { .. } => 3,
            CliError::IoFailure { .. } => 4,
        }
    }
}

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for gradgraph::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Module { context: what(), source })
    }
}

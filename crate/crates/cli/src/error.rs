use thiserror::Error;

use crate::config::Origin;

/// Anything that stops an experiment before a verdict; exit status 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}: {}{msg}", key.as_ref().map(|k| format!("key `{k}`: ")).unwrap_or_default())]
    Config { origin: Origin, key: Option<String>, msg: String },
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] adams_core::Error),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

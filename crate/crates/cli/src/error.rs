use crate::config::Diagnostic;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Config(String),

    #[error("unknown scenario `{0}` (see `list-scenarios`)")]
    UnknownScenario(String),

    #[error("configuration rejected with {} error(s)", .0.iter().filter(|d| d.level == crate::config::Level::Error).count())]
    Invalid(Vec<Diagnostic>),

    #[error("thread pool: {0}")]
    Threads(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] ratiosense_core::Error),
}

impl CliError {
    /// 2 for rejected input, 1 for failures during a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::UnknownScenario(_) | CliError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

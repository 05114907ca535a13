use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid model: {0}")]
    Model(#[from] sublevy::Error),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything wrong with the inputs, 3 for I/O.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) | Self::Model(_) => ExitCode::from(2),
            Self::Io { .. } => ExitCode::from(3),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Scenario { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: ductwarp::Error,
    },

    #[error(transparent)]
    Core(#[from] ductwarp::Error),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: ductwarp::Error) -> Self {
        CliError::File {
            path: path.into(),
            source,
        }
    }

    /// 2 for numerical failures, 1 for everything the user can fix in the inputs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

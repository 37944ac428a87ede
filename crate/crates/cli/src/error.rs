use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const USAGE: i32 = 3;
    pub const DIVERGED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Input(String),

    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] casper_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use casper_core::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Input(_) | CliError::Config { .. } | CliError::Io { .. } => exit::INPUT,
            CliError::Core(e) => match e {
                E::Diverged { .. } => exit::DIVERGED,
                E::Parameter(_) => exit::USAGE,
                _ => exit::INPUT,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

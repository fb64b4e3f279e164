use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] divacancy::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot read {path}: {msg}")]
    Input { path: PathBuf, msg: String },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }

    /// 0 success, 2 config or input error, 3 fit failure, 4 I/O error.
    pub fn exit_code(&self) -> i32 {
        use divacancy::Error as E;
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::Core(E::NonConvergence { .. } | E::InsufficientData(_) | E::Resolution(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

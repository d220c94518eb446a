use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected by the argument parser; also carries `--help` and `--version`.
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ko_core::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 for help output, 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(ko_core::Error::Domain(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] cachecast::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 2 configuration, 3 validation, 4 I/O, 5 numerical or unreachable target.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                cachecast::Error::InvalidParameter(_) => 2,
                cachecast::Error::Integrity(_) => 3,
                cachecast::Error::UnsupportedDomain(_)
                | cachecast::Error::Numerical(_)
                | cachecast::Error::Unreachable(_) => 5,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

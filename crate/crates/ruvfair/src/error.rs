use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: missing required columns: {}", missing.join(", "))]
    MissingColumns { path: PathBuf, missing: Vec<String> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("split {split}: {source}")]
    Split {
        split: usize,
        #[source]
        source: ruvfair_core::Error,
    },
    #[error(transparent)]
    Core(#[from] ruvfair_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 for invalid input, 2 for I/O or schema
    /// problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } | AppError::Parse { .. } | AppError::MissingColumns { .. } => 2,
            AppError::Config(_) => 1,
            AppError::Split { source, .. } | AppError::Core(source) => {
                if source.is_numerical() {
                    3
                } else {
                    1
                }
            }
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid input at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit code: 1 I/O, 2 parse, 3 validation, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse { .. } => 2,
            CliError::Validation { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Sorts a library error into validation or numerical failure.
    pub fn from_core(path: &str, e: avgop_core::Error) -> Self {
        if e.is_validation() {
            CliError::invalid(path, e.to_string())
        } else {
            CliError::Numerical(format!("{path}: {e}"))
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

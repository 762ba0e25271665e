use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] brightcv_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("oracle validation failed: {failed} of {total} comparisons have |z| > 3")]
    OracleFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 1 for usage and configuration problems, 2 for numerical failures,
    /// 3 when the oracle disagrees with the model.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Syntax { .. }
            | CliError::Config { .. }
            | CliError::Io(_) => 1,
            CliError::Core(brightcv_core::Error::InvalidParameter { .. }) => 1,
            CliError::Core(_) => 2,
            CliError::OracleFailed { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

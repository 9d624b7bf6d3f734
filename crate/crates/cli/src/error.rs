use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: mrio_core::Error },
    #[error(transparent)]
    Core(#[from] mrio_core::Error),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("{0}")]
    Config(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn data(path: impl Into<PathBuf>, source: mrio_core::Error) -> Self {
        CliError::Data {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for validation failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

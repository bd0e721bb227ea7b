use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] syk_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Fixture { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{path}: malformed spectrum file: {message}")]
    SpectrumFile { path: PathBuf, message: String },
    #[error("{path}: persisted record was produced by a different configuration (hash {found}, expected {expected})")]
    HashMismatch { path: PathBuf, found: String, expected: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    ResourceCap(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 1 for usage, 2 for data and validation problems,
    /// 3 for resource caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::ResourceCap(_) | Error::Core(syk_core::Error::MatrixCap { .. }) | Error::Core(syk_core::Error::DenseCap { .. }) => 3,
            _ => 2,
        }
    }
}

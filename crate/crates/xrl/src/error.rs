use std::path::{Path, PathBuf};

/// Errors surfaced by file formats, orchestration and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] xrl_core::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        Error::Format { path: path.to_path_buf(), msg: msg.into() }
    }

    pub fn at_line(path: &Path, line: u64, msg: impl std::fmt::Display) -> Self {
        Error::Format { path: path.to_path_buf(), msg: format!("line {line}: {msg}") }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// 1 usage, 2 data or format, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Format { .. } | Error::Io { .. } => 2,
            Error::Core(e) => match e {
                xrl_core::Error::Config(_) => 1,
                xrl_core::Error::Input(_) | xrl_core::Error::ModelIntegrity(_) => 2,
                _ => 3,
            },
            Error::Runtime(_) => 3,
            Error::Context { source, .. } => source.exit_code(),
        }
    }
}

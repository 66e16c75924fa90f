use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown item {0}")]
    UnknownItem(String),
    #[error("invalid queue: {0}")]
    InvalidQueue(String),
    #[error("{path}: corrupt decision log at line {line}: {reason}")]
    CorruptLog { path: PathBuf, line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

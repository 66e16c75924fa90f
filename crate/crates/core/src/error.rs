use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate tweet id `{0}`")]
    DuplicateId(String),

    #[error("auxiliary tweet id `{0}` collides with the main corpus")]
    IdCollision(String),

    #[error("unknown tweet id `{0}`")]
    UnknownTweet(String),

    #[error("unknown stance label `{0}`")]
    UnknownLabel(String),

    #[error("embedding file {path}: {reason}")]
    Embeddings { path: PathBuf, reason: String },

    #[error("class {0} has no training examples")]
    EmptyClass(crate::Stance),

    #[error("training diverged: non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { loss: f64, epoch: usize, batch: usize },

    #[error("need at least {need} ids to build folds, got {got}")]
    TooFewIds { need: usize, got: usize },

    #[error("length mismatch: {0} gold labels vs {1} predictions")]
    LengthMismatch(usize, usize),

    #[error("no positive examples for the one-vs-all curve")]
    NoPositives,

    #[error("curve too short: {0} point(s), need at least 2")]
    CurveTooShort(usize),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("malformed model file at line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no token survives vocabulary filtering (min_df={min_df})")]
    EmptyVocabulary { min_df: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("representation mismatch: model expects {expected}, got {actual}")]
    RepresentationMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate sampling: all {n_samples} masks identical; increase n_samples")]
    DegenerateSampling { n_samples: usize },

    #[error("exact Shapley enumeration refused: {players} active features exceeds the limit of {limit}")]
    TooManyFeatures { players: usize, limit: usize },

    #[error("adapter protocol error: {message} (line: {line:?})")]
    Protocol { message: String, line: String },

    #[error("adapter request timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("model evaluation failed at draw {draw}: {source}")]
    DrawFailed {
        draw: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear system is singular or not positive definite")]
    Singular,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

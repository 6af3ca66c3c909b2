use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the training stack.
#[derive(Debug, Error)]
pub enum AdrError {
    #[error("shape mismatch in {context}: {left:?} vs {right:?}")]
    Shape {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("backward called before forward on this network")]
    NoForwardCache,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("architecture mismatch: {0}")]
    Architecture(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("run interrupted at timestep {0}")]
    Interrupted(u64),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("report has no sampler proposals (mode `{0}`)")]
    NoProposals(String),

    #[error("missing evaluation cells: {0:?}")]
    MissingCells(Vec<String>),

    #[error("malformed checkpoint {path}: field `{field}`: {reason}")]
    Checkpoint {
        path: PathBuf,
        field: String,
        reason: String,
    },

    #[error("refusing to overwrite existing output in {0} (pass --overwrite)")]
    OutputExists(PathBuf),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AdrError>;

impl AdrError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AdrError::Io {
            path: path.into(),
            source,
        }
    }
}

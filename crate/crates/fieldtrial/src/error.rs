use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("record {record_id}: {reason}")]
    InvalidRecord { record_id: String, reason: String },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("mapping error: {0}")]
    Mapping(String),

    #[error("artifact format error: {0}")]
    Artifact(String),

    #[error("stage {stage} failed: {cause}")]
    Stage { stage: String, cause: Box<Error> },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn record(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidRecord {
            record_id: id.into(),
            reason: reason.into(),
        }
    }

    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            cause: Box::new(self),
        }
    }
}

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{locator}: {message}")]
    Corpus { locator: String, message: String },

    #[error("duplicate channel_id {0}")]
    DuplicateChannel(i64),

    #[error("catalog error at {locator}: {message}")]
    Catalog { locator: String, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("no conversion rate for currency {0}")]
    MissingRate(String),

    #[error("failed to parse {locator}: {message}")]
    Parse { locator: String, message: String },

    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be accepted. `row` is 1-based and counts the header.
    #[error("ingestion error at row {row}: {message}")]
    Ingestion { row: usize, message: String },

    #[error("ingestion error: {0}")]
    IngestionFile(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("decomposition error: {0}")]
    Decomposition(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a short description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input or configuration rather than by a
    /// failure during computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Ingestion { .. }
            | Error::IngestionFile(_)
            | Error::Split(_)
            | Error::Validation(_)
            | Error::Shape(_) => true,
            Error::Context { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    InvalidInput(String),
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("column '{0}' has no observed values")]
    EmptyColumn(String),
    #[error("shape mismatch in layer {layer}: expected {expected}, found {found}")]
    ShapeMismatch {
        layer: usize,
        expected: String,
        found: String,
    },
    #[error("malformed {what} at line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

/// Tags an error with the pipeline stage that produced it.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}

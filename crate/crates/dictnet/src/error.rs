//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A binary file does not match its expected layout (bad magic, etc).
    #[error("format error: {0}")]
    Format(String),
    /// A file or buffer is shorter than its header claims.
    #[error("length error: {0}")]
    Length(String),
    /// Not enough samples to satisfy a requested split or atom count.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Mismatched matrix/vector dimensions.
    #[error("shape error: {0}")]
    Shape(String),
    /// An argument is outside its legal range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A numerical operation failed (singular system, non-finite input).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// An iterative solver could not reach its target.
    #[error("solver error: {0}")]
    Solver(String),
    /// A patch does not fit inside the (padded) image.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// Classifier training received unusable data.
    #[error("training error: {0}")]
    Training(String),
    /// A label or index is out of range.
    #[error("range error: {0}")]
    Range(String),
    /// Invalid experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// File IO failure, carrying the offending path.
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// An error from a pipeline stage, labelled with the stage name.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an IO error with the path it occurred at.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Labels an error with the pipeline stage it came from.
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Extension for attaching stage labels to results flowing through the
/// pipeline.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::stage(stage, e))
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid polygon: {vertices} vertices (at least 3 required)")]
    InvalidPolygon { vertices: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("standard deviation undefined for a single observation")]
    SdUndefined,

    #[error("empty region")]
    EmptyRegion,

    #[error("insufficient nuclei: {needed} required, {found} available")]
    InsufficientNuclei { needed: usize, found: usize },

    #[error("AUC undefined: labels contain a single class")]
    SingleClass,

    #[error("no events in survival data")]
    NoEvents,

    #[error("covariate is constant within every risk set containing an event")]
    DegenerateCovariate,

    #[error("x values are constant; regression slope undefined")]
    ConstantPredictor,

    #[error("could only place {placed} of {requested} nuclei")]
    PlacementFailure { placed: usize, requested: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("{file}:{line}: {message}")]
    Table {
        file: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or missing inputs, as opposed to
    /// data on which a computation is undefined.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidPolygon { .. }
                | Error::DimensionMismatch { .. }
                | Error::LengthMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::Schema { .. }
                | Error::Table { .. }
                | Error::Io { .. }
                | Error::Image { .. }
        )
    }
}

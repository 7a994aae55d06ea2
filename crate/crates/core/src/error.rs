use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    #[error("numeric failure at training cycle {cycle}: {detail}")]
    NonFiniteLoss { cycle: usize, detail: String },

    #[error("numeric failure in sweep {sweep}: {source}")]
    SweepFailed {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("column `{column}`: {source}")]
    Column {
        column: String,
        #[source]
        source: Box<Error>,
    },

    #[error("value {value} outside domain: {detail}")]
    Domain { value: f64, detail: String },

    #[error("optimal discriminator undefined: both densities are zero at {0}")]
    UndefinedPoint(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rubin pooling needs at least 2 imputations, got {0}")]
    InsufficientImputations(usize),

    #[error("column `{0}` has no observed values and cannot be imputed")]
    UnimputableColumn(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}: {detail}")]
    Parse { line: u64, detail: String },

    #[error("input has no data rows")]
    EmptyInput,

    #[error("ingestion failed for repeat {repeat} ({path}): {detail}")]
    Ingestion {
        repeat: usize,
        path: PathBuf,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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

    pub(crate) fn in_column(self, column: &str) -> Self {
        Error::Column {
            column: column.to_owned(),
            source: Box::new(self),
        }
    }

    /// True for failures caused by the numerics (non-finite losses or
    /// gradients) rather than by the input data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonFiniteGradient { .. } | Error::NonFiniteLoss { .. } => true,
            Error::SweepFailed { source, .. } | Error::Column { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

use thiserror::Error;

/// Errors produced anywhere in the estimation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("grid index ({row}, {col}) outside {rows_factor}x{cols_factor} grid")]
    InvalidAngle {
        row: usize,
        col: usize,
        rows_factor: usize,
        cols_factor: usize,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("channel generation failed: {0}")]
    Generation(String),
    #[error("channel assembly failed: {0}")]
    Assembly(String),
    #[error("noise calibration failed: {0}")]
    Calibration(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver diverged at iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("malformed dump at line {line}: {reason}")]
    Dump { line: usize, reason: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

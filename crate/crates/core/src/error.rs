use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{measure} cannot be computed for a {model} model")]
    UnsupportedMeasure { measure: String, model: String },

    #[error("non-absorbing chain: (I - Q) is singular on a closed set of states")]
    NonAbsorbing,

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("path without timestamp: {0}")]
    MissingTimestamp(String),

    #[error("degenerate split: no non-empty train/test partition after {0} attempts")]
    DegenerateSplit(usize),

    #[error("target set too small for decile labeling ({0} states, need at least 10)")]
    TargetSetTooSmall(usize),

    #[error("unknown member: {0}")]
    UnknownMember(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Csv(format!("{other:?}")),
        }
    }
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonAbsorbing | Error::NoConvergence { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

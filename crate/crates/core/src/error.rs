use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bang-per-buck undefined: good {good} has zero price")]
    UndefinedRatio { good: usize },

    #[error("bid b[{buyer}][{good}] = {bid} is positive on a zero-valued good")]
    InvalidBid { buyer: usize, good: usize, bid: f64 },

    #[error("log undefined: buyer {buyer} values good {good} but its price is zero")]
    UndefinedLog { buyer: usize, good: usize },

    #[error("degenerate state: activated buyer {buyer} has zero utility")]
    DegenerateState { buyer: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("liveness violated: {0}")]
    Liveness(String),

    #[error("market failed validation: {0}")]
    Validation(String),

    #[error("equilibrium oracle failed: {0}")]
    Oracle(Box<crate::equilibrium::OracleFailure>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Oracle(_) => 2,
            _ => 1,
        }
    }
}

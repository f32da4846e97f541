use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is at or below the zero threshold")]
    ZeroVector { norm: f64 },

    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dataset format error: {0}")]
    Format(String),

    #[error("row {row} of {what} has norm {norm}, outside the accepted 1 ± 1e-3 band")]
    Norm {
        what: &'static str,
        row: usize,
        norm: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sample {0} is already labeled")]
    AlreadyLabeled(usize),

    #[error("index {index} out of range for pool of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("pool overlap: {0}")]
    Overlap(String),

    #[error("complement label {0} equals the observed label")]
    ComplementEqualsLabel(usize),

    #[error("no labeled or pseudo-labeled samples to train on")]
    EmptyTrainingSet,

    #[error("test split is empty")]
    EmptyTestSet,

    #[error("no unlabeled samples remain")]
    PoolExhausted,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::InvalidTemperature(_) => 2,
            Error::Format(_)
            | Error::Norm { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::EmptyTestSet
            | Error::EmptyTrainingSet => 3,
            _ => 4,
        }
    }
}

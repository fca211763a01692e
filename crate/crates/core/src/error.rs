use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("singular design: all x values are equal, the slope is not identifiable")]
    SingularDesign,

    #[error("empty input")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{0}")]
    Selection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidProbability(_)
                | Error::OutOfRange { .. }
                | Error::Selection(_)
                | Error::Parse { .. }
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input line. `line` is 1-based and counts header and comment lines.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A model or statistic needs a field the dataset does not carry.
    #[error("{0}")]
    Unavailable(String),

    #[error("rank-deficient design (condition number {condition:.3e}); offending columns: {columns:?}")]
    RankDeficient { condition: f64, columns: Vec<String> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("identical losses: the loss differential is identically zero")]
    IdenticalLosses,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::Numerical(_) | Error::IdenticalLosses
        )
    }
}

use thiserror::Error;

/// Errors produced by the distribution engines, charts and ingestion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A kernel or distribution refers to states outside its state space,
    /// or kernels do not line up with each other.
    #[error("structural error: {0}")]
    Structural(String),

    /// Probabilities that are negative, exceed one, or rows that do not sum
    /// to the required total.
    #[error("validation error: {0}")]
    Validation(String),

    /// Exact computation would materialize more states than allowed.
    #[error(
        "capacity exceeded: {what} needs {required} but the budget is {budget}; \
         use the Monte Carlo estimate instead"
    )]
    Capacity {
        what: String,
        required: u128,
        budget: u128,
    },

    /// The binary sequence is all zeros or all ones, so no run or scan
    /// statistic can discriminate.
    #[error(
        "degenerate binary sequence: n1 = {n1} of n = {n}; choose a baseline \
         proportion p0 in a moderate range (0.1-0.8, e.g. 0.2-0.7)"
    )]
    Degenerate { n1: usize, n: usize },

    #[error("row {row}, column {column}: {message}")]
    Ingest {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

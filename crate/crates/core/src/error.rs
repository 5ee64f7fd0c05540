use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: vertex id {id} out of range for n = {n}")]
    VertexOutOfRange { line: usize, id: usize, n: usize },
    #[error("vertex set is empty")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex {0} is outside the oracle's query domain")]
    OutsideDomain(usize),
    #[error("graph must be unweighted")]
    Weighted,
    #[error("n = {n} exceeds the exact all-pairs cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("malformed oracle file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

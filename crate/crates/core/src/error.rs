use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid gate at variable {var}: {reason}")]
    InvalidGate { var: usize, reason: String },
    #[error("size bound exceeded: {what} = {got} > {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("attractor report is truncated")]
    Truncated,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("width mismatch: expected {expected}, got {got}")]
    Width { expected: usize, got: usize },
    #[error("fan-out budget exceeded at variable {var}: {count} > 2")]
    FanOut { var: usize, count: usize },
    #[error("dangling variable {var} has no regulatory function")]
    Dangling { var: usize },
    #[error("partial table is not monotone: {lo:?} <= {hi:?} but f({lo:?}) = {flo:?} is not <= {fhi:?}")]
    NotMonotone {
        lo: Vec<bool>,
        hi: Vec<bool>,
        flo: Vec<bool>,
        fhi: Vec<bool>,
    },
    #[error("output {output} is constant; constants are not in the gate alphabet")]
    ConstantOutput { output: usize },
    #[error("circuit of kind io_system has no combinational semantics")]
    NotCombinational,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("horizon {horizon} too small, need at least {needed}")]
    Horizon { horizon: u64, needed: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

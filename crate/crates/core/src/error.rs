use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: u64,
        min: u64,
        max: u64,
    },
    #[error("{what}: limit {requested} exceeds capacity {capacity}")]
    Capacity {
        what: &'static str,
        requested: u64,
        capacity: u64,
    },
    #[error("16-bit tally overflow for {tally} at n = {n}")]
    Overflow { tally: &'static str, n: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown statistic `{0}`")]
    UnknownStatistic(String),
    #[error("statistic {0} has no stated main term")]
    NoMainTerm(String),
}

impl Error {
    /// True for errors caused by exceeding a size or tally budget.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::Overflow { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

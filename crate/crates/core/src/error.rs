use thiserror::Error;

use crate::codetree::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability {text:?}: {reason}")]
    InvalidProbability { text: String, reason: &'static str },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid number {0:?}")]
    InvalidNumber(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid code tree: {}", format_violations(.0))]
    InvalidTree(Vec<Violation>),

    #[error("code pair mismatch: {0}")]
    PairMismatch(String),

    #[error("symbol {symbol} out of range for alphabet of size {n}")]
    SymbolOutOfRange { symbol: usize, n: usize },

    #[error("decode failed at bit {position}: {reason}")]
    Decode { position: usize, reason: &'static str },

    #[error("{what}: n = {n} exceeds the enumeration cap {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("x = {0} lies outside [0, 1]")]
    OutOfDomain(String),

    #[error("envelopes do not cross in [{l}, {r}]")]
    NoCrossing { l: String, r: String },

    #[error("iteration cap {0} exceeded before the cost parameter stabilised")]
    IterationCap(usize),

    #[error("ellipsoid phase exhausted its budget of {0} oracle calls without a certified point")]
    OracleBudget(usize),

    #[error("container: {0}")]
    Container(String),

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

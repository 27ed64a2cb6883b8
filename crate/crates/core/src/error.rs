use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid kneading map: {0}")]
    InvalidKneadingMap(String),
    #[error("invalid prefix: {predicate} violated at k={index}")]
    InvalidPrefix { predicate: String, index: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not enough cutting times: need more than S_{0}")]
    InsufficientCuttingTimes(usize),
    #[error("code is truncated; no integer value")]
    NotFinite,
    #[error("carry escapes the window at depth {depth}")]
    CarryOverflow { depth: usize },
    #[error("the zero code has no predecessor")]
    NoPredecessor,
    #[error("code has {available} nonzero indices, {requested} requested")]
    NotEnoughIndices { available: usize, requested: usize },
    #[error("not decidable within horizon {0}")]
    HorizonLimited(usize),
    #[error("precision exhausted at {bits} bits: {what}")]
    PrecisionExhausted { bits: u32, what: String },
    #[error("kneading prefix not realized by any slope in (1, 2]")]
    NotRealizable,
    #[error("cylinder wider than requested width after {symbols} symbols")]
    InsufficientSymbols { symbols: usize },
    #[error("index {index} out of range (available {available})")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("empty intersection in nest at b({0})")]
    EmptyIntersection(usize),
    #[error("periodic critical orbit: c_{0} = 1/2")]
    CriticalHit(usize),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

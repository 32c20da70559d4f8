use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic must be odd, got {0}")]
    EvenCharacteristic(u64),
    #[error("parameter `{0}` must be at least 1")]
    ZeroParameter(&'static str),
    #[error("field of {size} elements exceeds the configured cap of {cap}")]
    FieldTooLarge { size: u128, cap: u64 },
    #[error("{d} does not divide {n}")]
    NotDivisor { d: u64, n: u64 },
    #[error("no square root of -1 in F_{q}")]
    NoSqrtMinusOne { q: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group order {required} exceeds the cap of {cap}")]
    OrderOverCap { required: u128, cap: usize },
    #[error("closure exceeded the cap of {cap} elements (partial size {partial})")]
    ClosureOverCap { partial: usize, cap: usize },
    #[error("generator {0} is singular")]
    SingularGenerator(usize),
    #[error("{r} does not divide the group order {order}")]
    NotPrimeDivisor { r: u64, order: usize },
    #[error("{0} is not a prime")]
    NotPrimeArgument(u64),
    #[error("subgroup is not contained in the ambient group")]
    NotSubgroup,
    #[error("group of order {order} exceeds the subgroup-search cap of {cap}")]
    SubgroupSearchCap { order: usize, cap: usize },
    #[error("map does not stabilize the spread: member {member} is sent outside it")]
    NotStabilized { member: usize },
    #[error("{r} divides {q}")]
    NotCoprime { q: u64, r: u64 },
    #[error("invalid prime power {0}")]
    InvalidPrimePower(u64),
    #[error("unknown check id `{0}`")]
    UnknownCheck(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

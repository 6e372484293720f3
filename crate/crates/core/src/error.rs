use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state space must contain at least one state")]
    EmptyStateSpace,

    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("row {row}, entry {col}: {value} is not a probability")]
    InvalidProbability { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("weight {index} = {value} is not a probability")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("value {index} = {value} is not finite")]
    NonFinite { index: usize, value: f64 },

    #[error("map row {row}, entry {col}: {value} is out of range 0..{bound}")]
    MapOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        bound: usize,
    },

    #[error("environment too large: {size} points exceeds the cap of {cap}")]
    EnvironmentTooLarge { size: u128, cap: u128 },

    #[error(
        "exact enumeration needs {size} environment tuples, over the cap of {cap}; use the Monte Carlo estimator"
    )]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("state space of size {size} exceeds the exhaustive cap of {cap}")]
    TooManyStates { size: usize, cap: usize },

    #[error("step count {requested} exceeds the available {available}")]
    HorizonExceeded { requested: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state became non-finite at step {step}")]
    Explosion { step: usize },

    #[error("{count} of {total} paths exploded")]
    PathsExploded { count: usize, total: usize },

    #[error("observable {0} has no registered derivatives")]
    NoDerivatives(String),

    #[error("invalid model parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

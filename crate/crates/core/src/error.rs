use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability p[{index}] = {value} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("a product measure needs at least one coordinate")]
    EmptyMeasure,

    #[error("coordinate {index} is trivial (p = {value}); reduce the measure first")]
    TrivialCoordinate { index: usize, value: f64 },

    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} out of range for n = {n}")]
    CoordinateOutOfRange { index: usize, n: usize },

    #[error("coordinate {index} already belongs to the set")]
    CoordinateInSet { index: usize },

    #[error("level {level} out of range for n = {n}")]
    LevelOutOfRange { level: usize, n: usize },

    #[error("degree {degree} exceeds the {available} indexed coordinates")]
    DegreeOutOfRange { degree: usize, available: usize },

    #[error("the full set has no successor")]
    FullSet,

    #[error("odds must be positive and finite (q[{index}] = {value})")]
    NonPositiveOdds { index: usize, value: f64 },

    #[error("family is not an antichain: {0} strictly contains {1}")]
    NotAntichain(String, String),

    #[error("duplicate family member {0}")]
    DuplicateMember(String),

    #[error("n = {n} exceeds the supported maximum {max} for this operation")]
    TooLarge { n: usize, max: usize },

    #[error("distribution sums to {total}, expected 1")]
    Unnormalized { total: f64 },

    #[error("distribution mixes levels {0} and {1}")]
    MixedLevels(usize, usize),

    #[error("sigma is zero: the level distribution is deterministic")]
    ZeroSigma,

    #[error("{trials} trials is fewer than the required {required}")]
    InsufficientTrials { trials: usize, required: usize },

    #[error("significance level {0} is not in (0, 1)")]
    InvalidAlpha(f64),

    #[error("degrees of freedom must be at least 1")]
    InvalidDof,

    #[error("n = {0} must be positive and even")]
    OddSize(usize),

    #[error("cannot parse subset mask {0:?}")]
    InvalidMask(String),

    #[error("internal theorem violation: {0}")]
    Violation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

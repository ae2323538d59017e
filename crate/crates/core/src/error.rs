use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("permutation length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("not a bijection on 1..={len}: {reason}")]
    NotABijection { len: usize, reason: String },
    #[error("group `{group}` has {len} values, need at least {min}")]
    GroupTooSmall {
        group: &'static str,
        len: usize,
        min: usize,
    },
    #[error("non-finite value {value} at {group}[{index}]")]
    NonFinite {
        group: &'static str,
        index: usize,
        value: f64,
    },
    #[error("index {index} out of range 1..={len} for {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid walk plan: {0}")]
    InvalidPlan(String),
    #[error("vertex {vertex} has shape ({m}, {n}), expected ({expected_m}, {expected_n})")]
    ShapeMismatch {
        vertex: usize,
        m: usize,
        n: usize,
        expected_m: usize,
        expected_n: usize,
    },
    #[error("field has {0} vertices, expected {1}")]
    FieldLength(usize, usize),
    #[error("cannot merge accumulators: {0}")]
    Merge(String),
    #[error("sample retention was disabled; thresholds need retained null samples")]
    RetentionDisabled,
    #[error("need at least {needed} walks for alpha = {alpha}, have {have}")]
    InsufficientSamples { needed: u64, have: u64, alpha: f64 },
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("{count} assignments exceed the enumeration limit of {limit}; use random walks instead")]
    EnumerationLimit { count: u128, limit: u128 },
    #[error("statistic is degenerate (zero variance) on the observed labeling")]
    DegenerateObserved,
}

pub type Result<T> = std::result::Result<T, Error>;

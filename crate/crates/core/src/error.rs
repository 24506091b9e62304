use thiserror::Error;

/// Which of the two index conditions forced a schedule search past its cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleCondition {
    /// `4 * 2pi * C(0) * C(N) < 2^-k`
    EnvelopeDecay,
    /// `2^-k * log N > k`
    LogGrowth,
}

impl std::fmt::Display for ScheduleCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleCondition::EnvelopeDecay => write!(f, "envelope decay 8*pi*C(0)*C(N) < 2^-k"),
            ScheduleCondition::LogGrowth => write!(f, "log growth 2^-k * log N > k"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite coefficient at k = {0}")]
    NonFinite(i64),

    #[error("sequence is not strictly increasing at position {0}")]
    NotIncreasing(usize),

    #[error("empty schedule")]
    EmptySchedule,

    #[error("coefficient cap exceeded at level {level}: {needed} coefficients needed, cap is {cap}")]
    CapExceeded { level: usize, needed: u128, cap: u64 },

    #[error(
        "schedule search exceeded cap {cap} at level {level} ({condition}); partial schedule {partial:?}"
    )]
    ScheduleCapExceeded {
        level: usize,
        condition: ScheduleCondition,
        cap: u64,
        partial: Vec<u64>,
    },

    #[error("condition ii) N1(l_(r+1)) >= N(l_r)^2 cannot be met for block {block}: {detail}")]
    SubsequenceExhausted { block: usize, detail: String },

    #[error("anchor t0 = {0} is an integer")]
    IntegerAnchor(f64),

    #[error("perturbation |g({k})| = {value} is not below 1/2")]
    PerturbationTooLarge { k: i64, value: f64 },

    #[error("point {value} is outside the trusted domain |z| <= {limit}")]
    OutOfDomain { value: f64, limit: f64 },

    #[error("index {index} outside the admissible range [{lo}, {hi}]")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("N = {n} is outside schedule coverage [1, {max}]")]
    OutsideCoverage { n: u64, max: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

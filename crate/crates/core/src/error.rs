use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("arm count must be at least {min}, got {k}")]
    TooFewArms { k: usize, min: usize },

    #[error("arm index {arm} out of range for {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },

    #[error("probability for pair ({i}, {j}) is {value}, outside [0, 1]")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error("missing entry for pair ({i}, {j})")]
    MissingPair { i: usize, j: usize },

    #[error("matrix for pair ({i}, {j}) violates {what}")]
    InvalidMatrix { i: usize, j: usize, what: &'static str },

    #[error("arm count mismatch: expected {expected}, got {got}")]
    ArmCountMismatch { expected: usize, got: usize },

    #[error("horizon mismatch: expected {expected}, got {got}")]
    HorizonMismatch { expected: usize, got: usize },

    #[error("invalid segment boundaries: {0}")]
    InvalidBoundaries(String),

    #[error("invalid environment spec: {0}")]
    InvalidEnvSpec(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-positive or non-finite weight {value} at arm {arm}")]
    BadWeight { arm: usize, value: f64 },

    #[error("non-positive probability {value} at arm {arm}")]
    BadProbability { arm: usize, value: f64 },

    #[error("weight update overflowed at arm {arm}")]
    WeightOverflow { arm: usize },

    #[error("schedule `{schedule}` needs `{missing}`")]
    MissingScheduleInput {
        schedule: &'static str,
        missing: &'static str,
    },

    #[error("schedule invariant violated: {0}")]
    ScheduleInvariant(String),

    #[error("benchmark `{0}` is not available for this environment")]
    BenchmarkUnavailable(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

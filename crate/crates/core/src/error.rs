use thiserror::Error;

/// Outcome sets inside errors are outcome indices into the sample space.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("sample space has no outcomes")]
    EmptySpace,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("outcome `{outcome}` has non-positive weight {weight}")]
    NonPositiveWeight { outcome: String, weight: String },
    #[error("weights sum to {sum}, not 1")]
    WeightsNotNormalized { sum: String },
    #[error("duplicate outcome `{0}`")]
    DuplicateOutcome(String),
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("outcome index {index} out of range for {len} outcomes")]
    OutcomeOutOfRange { index: usize, len: usize },
    #[error("time {time} is outside the horizon 0..={horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("expected {expected} filtration levels, found {found}")]
    LevelCount { expected: usize, found: usize },
    #[error("level {time} is not a partition: {reason}")]
    NotAPartition { time: usize, reason: String },
    #[error("level {finer} does not refine level {coarser}: atom {atom:?} straddles several coarser atoms")]
    RefinementViolated {
        coarser: usize,
        finer: usize,
        atom: Vec<usize>,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("process is not adapted at time {time}: not constant on atom {atom:?}")]
    NotAdapted { time: usize, atom: Vec<usize> },
    #[error("strategy is not predictable at time {time}: not constant on atom {atom:?}")]
    NotPredictable { time: usize, atom: Vec<usize> },
    #[error("density is not strictly positive at outcome {outcome}")]
    NonPositiveDensity { outcome: usize },
    #[error("density has mean {mean}, not 1")]
    DensityMean { mean: String },
    #[error("random time takes value {value} at outcome {outcome}, outside 0..={horizon}")]
    RandomTimeRange {
        outcome: usize,
        value: usize,
        horizon: usize,
    },
    #[error("process is not a martingale: nonzero drift at time {time} on atom {atom:?}")]
    NotMartingale { time: usize, atom: Vec<usize> },
    #[error("random time is not honest: two values on atom {atom:?} at time {time}")]
    NotHonest { time: usize, atom: Vec<usize> },
    #[error("no equivalent martingale measure: arbitrage at time {time} on atom {atom:?}")]
    Arbitrage { time: usize, atom: Vec<usize> },
    #[error("instance too large for grid search: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

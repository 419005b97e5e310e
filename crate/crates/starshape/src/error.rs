use thiserror::Error;

/// Errors raised by constructors and evaluators.
#[derive(Debug, Error)]
pub enum StarError {
    #[error("empty input: at least one outcome/value is required")]
    EmptyInput,

    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("weights must sum to 1: got {sum} (|sum - 1| > {tol})")]
    WeightSum { sum: f64, tol: f64 },

    #[error("weight at index {index} is not positive: {weight}")]
    NonpositiveWeight { index: usize, weight: f64 },

    #[error("negative weight at index {index}: {weight}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("length mismatch: {left} values vs {right} outcomes")]
    LengthMismatch { left: usize, right: usize },

    #[error("random variables live on different finite spaces")]
    SpaceMismatch,

    #[error("probability level {0} outside [0, 1]")]
    LevelOutOfRange(f64),

    #[error("level {0} is degenerate for this operation")]
    DegenerateLevel(f64),

    #[error("mix parameter {0} outside [0, 1]")]
    MixOutOfRange(f64),

    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),

    #[error("invalid loss threshold: {0}")]
    InvalidThreshold(String),

    #[error("invalid deviation levels: lo {lo} must be < hi {hi}, both in [0, 1]")]
    InvalidDeviationLevels { lo: f64, hi: f64 },

    #[error("family level x = {0} must be positive")]
    NonpositiveFamilyLevel(f64),

    #[error("risk family is not monotone in x: {0}")]
    NonMonotoneFamily(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("negative denominator {0}: input is not a monetary risk measure on this position")]
    NegativeDenominator(f64),

    #[error("negative numerator {0}: input is not a monotone normalized reward on this position")]
    NegativeNumerator(f64),

    #[error("exact search requires at most {max} outcomes, got {got}")]
    TooManyOutcomes { got: usize, max: usize },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("order statistic {k} outside 1..={n}")]
    OrderStatOutOfRange { k: usize, n: usize },

    #[error("index '{0}' is not declared law invariant; scenario evaluation is ill-defined")]
    NotLawInvariant(String),

    #[error("scenario '{0}' not present in the evaluated set")]
    MissingScenario(String),

    #[error("market has no assets")]
    EmptyMarket,

    #[error("too few samples: need at least {need} finite samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, StarError>;

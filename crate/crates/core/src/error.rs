use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("map is not a permutation of 0..{n}: {detail}")]
    NotAPermutation { n: usize, detail: String },

    #[error("cycle weights must be strictly positive (cycle {cycle} has weight {weight})")]
    WeightsNotPositive { cycle: usize, weight: String },

    #[error("point masses sum to {sum}, expected 1")]
    WeightsDontSumToOne { sum: String },

    #[error("expected {expected} per-cycle values, got {got}")]
    CycleCountMismatch { expected: usize, got: usize },

    #[error("observable has {got} values but the system has {expected} points")]
    ObservableLengthMismatch { expected: usize, got: usize },

    #[error("point {point} out of range for a system on {n} points")]
    PointOutOfRange { point: usize, n: usize },

    #[error("horizon must be at least 1")]
    ZeroHorizon,

    #[error("horizon range is empty")]
    EmptyHorizonRange,

    #[error("invalid invariant function: {0}")]
    InvalidLambda(String),

    #[error("observable {observable} is not defined on a {system} system")]
    UnknownObservableForSystem { observable: String, system: String },

    #[error("truncation is only defined for finite systems")]
    TruncationOnSampledSystem,

    #[error("truncation level must be at least 1")]
    ZeroTruncationLevel,

    #[error("window length {m} is shorter than horizon {horizon}")]
    WindowTooShort { m: usize, horizon: usize },

    #[error("invalid sampled system: {0}")]
    InvalidSampledSystem(String),

    #[error(
        "internal contradiction: position {position} is in E_N but no prefix of at most {horizon} terms has positive sum"
    )]
    InternalContradiction { position: usize, horizon: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

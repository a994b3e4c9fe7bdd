use thiserror::Error;

use crate::bsm::BsmStrategy;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid branching vector: {0}")]
    InvalidBranching(String),

    #[error("{name} = {value} is not a probability in [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("loss profile has {got} levels but the tree has depth {expected}")]
    ProfileDepthMismatch { expected: usize, got: usize },

    #[error("level {level} is outside the valid range {min}..={max}")]
    LevelOutOfRange { level: usize, min: usize, max: usize },

    #[error("distance must be non-negative, got {0} km")]
    NegativeDistance(f64),

    #[error("transmissivity is 1 at zero distance; the repeaterless rate is unbounded")]
    UnboundedRate,

    #[error("strategy {0} needs a link tree")]
    MissingLinkTree(BsmStrategy),

    #[error("operation needs strategy {expected}, got {got}")]
    WrongStrategy { expected: BsmStrategy, got: BsmStrategy },

    #[error("exact enumeration exceeds {limit} outcome paths (stopped after {states})")]
    EnumerationTooLarge { states: u64, limit: u64 },

    #[error("exponent fit needs at least two points with positive rate, got {0}")]
    DegenerateFit(usize),

    #[error("no feasible configuration: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid lattice path: {0}")]
    InvalidPath(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state space has {size} states, above the cap of {cap}")]
    StateSpaceOverflow { size: usize, cap: usize },
    #[error("stationary measure is not unique: {classes} closed classes")]
    NonUniqueKernel { classes: usize, sizes: Vec<usize> },
    #[error("uniformization did not converge: {0}")]
    Uniformization(String),
    #[error("too few usable grid points: need {need}, have {have}")]
    TooFewPoints { need: usize, have: usize },
    #[error("censored fraction {fraction:.3} above the limit {limit:.3}")]
    Censoring { fraction: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid root system {family}{rank}: {constraint}")]
    InvalidRootSystem {
        family: char,
        rank: usize,
        constraint: &'static str,
    },

    #[error("vector {0} is not a root of the system")]
    NotARoot(String),

    #[error("point lies within {distance:.3e} of the mirror of root {root}")]
    SingularPoint { root: String, distance: f64 },

    #[error("point outside the convergence chamber: {0}")]
    OutsideChamber(String),

    #[error("argument outside the series domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not in the weighted hyperplane (residual {0})")]
    NotInHyperplane(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

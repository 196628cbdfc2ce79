use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: need n >= {1}")]
    InvalidDimension(usize, usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel singularity: points coincide (|x - y| = {0:e})")]
    Singular(f64),

    #[error("point lies outside the closed domain (distance from center {distance}, radius {radius})")]
    OutsideDomain { distance: f64, radius: f64 },

    #[error("grid spacing h = {h} leaves no node strictly inside the domain")]
    EmptyRule { h: f64 },

    #[error("field layout does not match the quadrature rule")]
    LayoutMismatch,

    #[error("not a contraction: q = {0}")]
    NotAContraction(f64),

    #[error("Picard iteration did not converge after {iterations} steps (last gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("need at least {needed} iterates, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("instance is not admissible")]
    NotAdmissible,

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate distribution: sigma = {0:e}")]
    Degenerate(f64),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Sample index attached to this error, if any.
    pub fn sample_index(&self) -> Option<usize> {
        match self {
            Error::Sample { index, .. } => Some(*index),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("weight vector is not a probability distribution: {0}")]
    InvalidWeights(String),

    #[error("oracle failed in round {round}: {source}")]
    OracleFailed {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("objective {objective} returned {value} in round {round}, outside [0, 1]")]
    LossOutOfRange {
        round: usize,
        objective: usize,
        value: f64,
    },

    #[error("non-finite gradient in round {round}")]
    NonFiniteGradient { round: usize },

    #[error("ground set of {n} items exceeds the exhaustive limit of {limit}; use sampled checking")]
    TooLarge { n: usize, limit: usize },

    #[error("node {node} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

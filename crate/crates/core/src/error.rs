use thiserror::Error;

/// Errors raised by the estimation library and simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bearing is undefined: the two points coincide")]
    CoincidentPoints,

    #[error("time increment must be positive (got {0} s at step {1})")]
    NonPositiveTimeStep(f64, usize),

    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("model order {signal_dim} is not identifiable with a {subarray_len}-element subarray")]
    NotIdentifiable { signal_dim: usize, subarray_len: usize },

    #[error("covariance is singular even after diagonal loading")]
    SingularCovariance,

    #[error("position grid is empty")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible bandwidth: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trial {trial}, step {step}: {source}")]
    Trial {
        trial: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("speed {speed} is not below the speed of light")]
    SpeedLimit { speed: f64 },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("unknown particle `{0}`")]
    UnknownParticle(String),

    #[error("state norm {norm} deviates from 1")]
    DegenerateState { norm: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown reference `{0}`")]
    UnknownReference(String),

    #[error("unknown test `{0}`")]
    UnknownTest(String),

    #[error("conditioning event has probability {probability:e}")]
    ZeroConditionProbability { probability: f64 },

    #[error("orders are not permutations of one test set")]
    OrderMismatch,

    #[error("test chain is empty")]
    EmptyChain,

    #[error("scenario has violations; validate it first")]
    NotValidated,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("amplitudes have norm {norm}, not normalizable within tolerance")]
    Norm { norm: f64 },
}

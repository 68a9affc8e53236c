use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("precision of {bits} bits is too small for an alphabet of {alphabet} symbols")]
    Precision { bits: u32, alphabet: usize },

    #[error("predictor unavailable: {0}")]
    PredictorUnavailable(String),

    #[error("predictor mismatch: {0}")]
    PredictorMismatch(String),

    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    #[error("unsupported container version {0}")]
    UnknownVersion(u8),

    #[error("codec adapter `{id}` unavailable: {reason}")]
    AdapterUnavailable { id: String, reason: String },

    #[error("bridge protocol error: {0}")]
    Protocol(String),

    #[error("invalid predictor spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptStream(msg.into())
    }

    pub(crate) fn unavailable(msg: impl Into<String>) -> Self {
        Error::PredictorUnavailable(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use thiserror::Error;

use crate::instance::SignRegime;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{operation} does not support the {family} externality family")]
    UnsupportedFamily {
        family: &'static str,
        operation: &'static str,
    },

    #[error("{operation} requires the {expected} regime, instance is {found:?}")]
    UnsupportedRegime {
        operation: &'static str,
        expected: &'static str,
        found: SignRegime,
    },

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },

    #[error("{what} exceeds the size limit ({size} > {limit})")]
    SizeLimit {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::normal::ProbabilityDomainError;

/// Invalid configuration, detected before any simulation work starts.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Domain(#[from] ProbabilityDomainError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Domain(insider_na::Error),
    /// A verified identity or an equivalence failed to hold.
    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl From<insider_na::Error> for CliError {
    fn from(e: insider_na::Error) -> Self {
        match e {
            insider_na::Error::Invariant(msg) => CliError::Invariant(msg),
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    /// 1 usage, 2 model validation, 3 invariant breach.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(_) | CliError::Domain(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

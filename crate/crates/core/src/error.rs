use thiserror::Error;

use crate::envbridge::BridgeError;
use crate::rl::env::EnvError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing configuration (qubit counts, budgets, file contents).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an operation's precondition (wrong wire, wrong length, wrong head mode).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("oracle scale error: {n_qubits} qubits exceeds the oracle limit of {limit}")]
    OracleScale { n_qubits: usize, limit: usize },

    #[error(transparent)]
    Env(EnvError),

    #[error(transparent)]
    Bridge(#[from] BridgeError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

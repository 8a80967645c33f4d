//! File formats, Monte Carlo harnesses and the command-line driver on top of
//! [`pdfilter_core`].

pub mod cli;
pub mod commands;
pub mod export;
pub mod lawcheck;
pub mod manifest;
pub mod model_file;
pub mod montecarlo;

pub use model_file::{LoadedModel, ModelFile};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid model file: {0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] pdfilter_core::Error),
}

impl Error {
    /// Process exit status: 2 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Model(pdfilter_core::Error::NoConvergence { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

use crate::lagrangian::VortexState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("kernel evaluated at its singularity")]
    Singularity,

    /// Positions became non-finite; carries the last state that was still finite.
    #[error("solver blowup at t = {time}")]
    Blowup {
        time: f64,
        last_valid: Box<VortexState>,
    },

    #[error("flow inversion failed at {} target nodes", nodes.len())]
    InversionFailure { nodes: Vec<usize> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn exponent(msg: impl Into<String>) -> Self {
        Error::InvalidExponent(msg.into())
    }

    pub(crate) fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }
}

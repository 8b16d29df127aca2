use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible degree sequence: {0}")]
    InfeasibleDegreeSequence(String),

    #[error("degree support of the inoculation plan does not match the distribution")]
    SupportMismatch,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integration left the unit interval at t={t}: {detail}")]
    IntegrationBlowup { t: f64, detail: String },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("bracket [{lo}, {hi}] does not contain the onset R = {epsilon}")]
    BracketViolation { lo: f64, hi: f64, epsilon: f64 },

    #[error("no un-inoculated seed available")]
    NoSeedAvailable,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

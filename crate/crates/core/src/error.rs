use thiserror::Error;

/// Errors produced anywhere in the solve → wavefunction → density matrix →
/// spectrum pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "Bethe solver did not converge (c_eff = {c_eff}, residual = {residual:e}, last iterate = {last_iterate:?})"
    )]
    SolverFailure {
        c_eff: f64,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("wavefunction too small at the test point (|psi| = {0:e}); resample")]
    DegeneratePoint(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unsupported Gauss-Legendre order {0} (supported: 1..=32)")]
    QuadratureOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error(
        "fixed-point iteration did not converge at step {step}: \
         increment {increment:.3e} > threshold {threshold:.3e} after {iterations} iterations"
    )]
    IterationLimitExceeded { step: usize, iterations: usize, increment: f64, threshold: f64 },

    #[error("non-finite coefficient encountered at step {step}")]
    NonFiniteState { step: usize },

    #[error("initial data is identically zero; the full-line time step is undefined")]
    ZeroInitialData,

    #[error("exact solution vanishes on the error grid")]
    ZeroReference,

    #[error("linear system is singular")]
    SingularMatrix,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

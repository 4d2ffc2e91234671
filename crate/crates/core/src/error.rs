use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e}, relative to {scale:.3e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("no eigenvalue of the direct-link Gram matrix lies below {eps_rel:.3e} x lambda_max; increase eps_rel")]
    EmptyNullSpace { eps_rel: f64 },

    #[error("scene error at `{field}`: {message}")]
    Scene { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn scene(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scene {
            field: field.into(),
            message: message.into(),
        }
    }
}

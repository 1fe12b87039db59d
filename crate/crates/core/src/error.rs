use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("solver did not converge: {msg} (residual {residual:.3e})")]
    Solver { msg: String, residual: f64 },

    #[error("integration diverged at t = {t}")]
    Divergence { t: f64 },

    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("no embedding for trajectory id {0}")]
    MissingEmbedding(u64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite activation in layer {layer}")]
    NonFinite { layer: usize },

    #[error("loss is not finite at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },

    #[error("gram matrix is not positive semidefinite (quadratic form {0:.3e})")]
    Gram(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QxError {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// The requested quantity needs the parametrization (or a search region)
    /// beyond the range where it is trusted.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("resonance at order {order}: |lambda^k - eigenvalue| = {denominator:e}")]
    Resonance { order: usize, denominator: f64 },
    #[error("green function evaluation inconclusive at {0}")]
    GreenInconclusive(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = QxError> = std::result::Result<T, E>;

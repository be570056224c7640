use thiserror::Error;

/// Errors raised by the geometry, assembly and spectral layers.
#[derive(Debug, Error)]
pub enum FbmsError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("singular chart at (t = {t}, theta = {theta}): metric determinant {det:e}")]
    SingularChart { t: f64, theta: f64, det: f64 },

    #[error("degenerate metric in cell ({cell_t}, {cell_theta}): determinant {det:e}")]
    DegenerateCell {
        cell_t: usize,
        cell_theta: usize,
        det: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("borderline eigenvalue in strict mode: {0}")]
    Borderline(String),
}

impl FbmsError {
    pub fn validation(msg: impl Into<String>) -> Self {
        FbmsError::Validation(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        FbmsError::Solver(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, FbmsError>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("degenerate retraction at entry ({row}, {col}): modulus {modulus:e}")]
    DegenerateRetraction { row: usize, col: usize, modulus: f64 },

    #[error("point is not feasible: {0}")]
    Infeasible(String),

    #[error("previous gradient is zero; conjugate parameter undefined")]
    ZeroGradient,

    #[error("objective evaluation returned a non-finite value ({0})")]
    NonFinite(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::ShapeMismatch { expected, actual }
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unbound symbol `{0}`")]
    Unbound(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("expression is outside the normalizable class: {0}")]
    NonNormalizable(String),

    #[error("incompatible boundary-term differential at order {order}: d/d{first} and d/d{second} disagree")]
    Incompatible {
        order: usize,
        first: String,
        second: String,
    },

    #[error("mass matrix is not symbolically invertible; use numeric mode")]
    NumericOnly,

    #[error("integration aborted at t = {t}: {reason}")]
    IntegrationAborted { t: f64, reason: String, state: Vec<f64> },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

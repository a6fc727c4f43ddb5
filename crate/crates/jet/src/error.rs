use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("expression has order {order}, symbol requested at order {k}")]
    OrderExceeded { order: usize, k: usize },
    #[error("cyclic substitution through `{0}`")]
    CyclicSubstitution(String),
    #[error("invalid coordinates: {0}")]
    InvalidCoordinates(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, JetError>;

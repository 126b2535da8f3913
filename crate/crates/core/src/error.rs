use thiserror::Error;

use crate::rational::ParseRationalError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid bucket order: {0}")]
    InvalidOrder(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    #[error("enumeration refused: {n} items give {count} weak orders (cap is {cap} items)")]
    CapExceeded { n: usize, cap: usize, count: String },

    #[error("order is incompatible with the model: {0}")]
    Incompatible(String),

    #[error("missing value for variable `{0}`")]
    MissingVariable(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Number(#[from] ParseRationalError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

use crate::combinat::BoundsError;

/// Failures while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero: `{0}` vanishes")]
    DivisionByZero(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("exact arithmetic cannot evaluate {0}")]
    ExactUnsupported(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({0}×{1})")]
    NonSquare(usize, usize),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Crate-level error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("invalid web: {0}")]
    InvalidWeb(String),
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("operation needs codimension n−1 (got n={n}, q={q})")]
    WrongCodimension { n: usize, q: usize },
    #[error("could not find a usable sample point after {0} attempts")]
    PointSelectionFailed(usize),
    #[error("web is not calibrated for this degree")]
    NotCalibrated,
    #[error("web is not ordinary: top jet matrix is singular")]
    NotOrdinary,
    #[error("symbolic computation needs a rational web: {0}")]
    TranscendentalUnsupported(String),
    #[error("web does not match the curve template: {0}")]
    TemplateMismatch(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

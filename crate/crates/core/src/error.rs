use thiserror::Error;

/// Errors produced anywhere in the approximation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("coincident left/right abscissa {x} (left row {row}, right column {col})")]
    DivisionByZero { x: f64, row: usize, col: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("cannot convert to standard form: {0}")]
    Conversion(String),
    #[error("evaluation point {x} is at or near a pole")]
    PoleProximity { x: f64 },
    #[error("linear system is singular to working precision (rcond = {rcond:e})")]
    Singular { rcond: f64 },
    #[error("{routine} failed with info = {info}{detail}")]
    Kernel {
        routine: &'static str,
        info: i32,
        detail: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

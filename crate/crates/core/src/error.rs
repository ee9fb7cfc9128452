use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("wave number must be non-negative, got {0}")]
    NegativeWavenumber(f64),

    #[error("connection matrix is not in SL(2,R): alpha*delta - beta*gamma - 1 = {residual:e}")]
    NotSpecialLinear { residual: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gamma = 0 schedule is singular: alpha + delta + 2 = {sum:e}")]
    DegenerateSchedule { sum: f64 },

    #[error("geometry: delta spacing a = {a} must be below min(-x1, x2) = {limit}")]
    Geometry { a: f64, limit: f64 },

    #[error("k = {k} is not an eigenvalue: secular residual {residual:e} exceeds {tolerance:e}")]
    NotAnEigenvalue {
        k: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("level n = {n} not found in the computed spectrum ({available} levels)")]
    LevelNotFound { n: usize, available: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

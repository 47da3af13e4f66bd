use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid index {index} (limit {limit})")]
    InvalidIndex { index: usize, limit: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("observable is not a +/-1 involution: {0}")]
    InvalidObservable(String),

    #[error("parameter vector has length {got}, family expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("outcome counts are empty")]
    EmptyCounts,

    #[error("|{value}| exceeds the Tsirelson bound 2*sqrt(2)")]
    OutOfPhysicalRange { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

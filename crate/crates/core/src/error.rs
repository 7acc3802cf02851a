use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown representation `{label}`; supported: {}", supported.join(", "))]
    UnknownRepresentation {
        label: String,
        supported: Vec<&'static str>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid size {n} exceeds the dense limit {limit}{hint}")]
    TooLarge {
        n: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("series too short: {len} samples spanning {span_periods:.2} periods, need at least {min_len} samples and 4 periods")]
    SeriesTooShort {
        len: usize,
        min_len: usize,
        span_periods: f64,
    },

    #[error("conditioning projector has weight {weight:e} at or below the threshold {threshold:e}")]
    NearNullCondition { weight: f64, threshold: f64 },

    #[error("projectors `{0}` and `{1}` do not commute (residual {2:e})")]
    NonCommuting(String, String, f64),

    #[error("classically forbidden region entered at R = {turning_point}")]
    ClassicallyForbidden { turning_point: f64 },

    #[error("adaptive step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("constraint violated: residual {residual:e} exceeds {tolerance:e}")]
    Constraint { residual: f64, tolerance: f64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

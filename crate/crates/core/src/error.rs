use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires the elliptic regime")]
    WrongRegime,

    #[error(
        "theta series does not converge: Im(tau) = {im_tau}, cutoff = {cutoff}, tail = {tail:e}"
    )]
    NonConvergent {
        im_tau: f64,
        cutoff: usize,
        tail: f64,
    },

    /// An argument came within the pole guard of the singular set.
    #[error("argument `{arg}` = {value} is within {distance:e} of a pole (guard {guard:e})")]
    NearPole {
        arg: String,
        value: Complex64,
        distance: f64,
        guard: f64,
    },

    #[error("non-finite value produced by `{0}`")]
    NonFinite(&'static str),

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) out of range for a {dim}x{dim} grid")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("R-matrix calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("spin matrix is not rank one (residual {residual:e})")]
    NotRankOne { residual: f64 },

    #[error("state is off shell: max |mu| = {mu:e}")]
    OffShell { mu: f64 },

    #[error("singular configuration at t = {time}: {detail}")]
    SingularConfiguration { time: f64, detail: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn near_pole(arg: impl Into<String>, value: Complex64, distance: f64, guard: f64) -> Self {
        Error::NearPole {
            arg: arg.into(),
            value,
            distance,
            guard,
        }
    }

    pub fn is_near_pole(&self) -> bool {
        matches!(self, Error::NearPole { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

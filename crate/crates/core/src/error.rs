use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("incompatible grids: n={left} vs n={right}")]
    IncompatibleGrids { left: usize, right: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid cutoff {cutoff}: must lie in 1..={max}")]
    InvalidCutoff { cutoff: usize, max: usize },

    #[error("wavenumber ({k1}, {k2}) outside the dealiased lattice (cutoff {cutoff})")]
    WavenumberOutOfRange { k1: i64, k2: i64, cutoff: usize },

    #[error("blow-up at t={t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("degenerate denominator |<A u~_N, w_N>| = {value:e}")]
    DegenerateDenominator { value: f64 },

    #[error("force is zero; shape factors are undefined")]
    ZeroForce,

    #[error("window too short: need at least {needed} samples, got {got}")]
    WindowTooShort { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse error in {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("config validation failed:\n  - {}", .0.join("\n  - "))]
    ConfigValidation(Vec<String>),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

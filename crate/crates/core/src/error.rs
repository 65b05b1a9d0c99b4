use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("integrator could not meet tolerance {tolerance:e} at t = {time:e} s: {reason}")]
    Tolerance {
        tolerance: f64,
        time: f64,
        reason: String,
    },

    #[error("state norm {norm} exceeds 1 + 10*tol at t = {time:e} s")]
    NormGuard { norm: f64, time: f64 },

    #[error("step size error: {0}")]
    StepSize(String),

    #[error("perfect gap: suppression depth reached 1 (lifetime diverges)")]
    PerfectGap,

    #[error("mean T1 factor diverges: suppression reaches 1 where the angular weight is positive")]
    Divergent,

    #[error("lindblad oracle supports at most 4 TLSs, got {0}")]
    OracleSize(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag, used by the CLI error summary.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Tolerance { .. } => "tolerance",
            Error::NormGuard { .. } => "norm_guard",
            Error::StepSize(_) => "step_size",
            Error::PerfectGap => "perfect_gap",
            Error::Divergent => "divergent",
            Error::OracleSize(_) => "oracle_size",
            Error::Parse(_) => "parse",
            Error::MissingInput(_) => "missing_input",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

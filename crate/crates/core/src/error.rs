use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid initial data: {0}")]
    InvalidInitial(String),

    #[error("domain too small: tail |u(L)| = {tail:.3e} exceeds {threshold:.1e} of peak {peak:.3e}")]
    DomainTooSmall { tail: f64, peak: f64, threshold: f64 },

    #[error("initial data is not odd: extrapolated |u(0)| = {origin:.3e} vs peak {peak:.3e}")]
    NotOdd { origin: f64, peak: f64 },

    #[error("non-finite value in state at node {node}")]
    NonFinite { node: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("numerical fault: non-finite field after step {step} (last good time t = {last_good_t})")]
    NumericalFault {
        step: usize,
        last_good_t: f64,
        last_good: Box<crate::domain::State>,
    },

    #[error("wall reflection: mass {edge_mass:.3e} near x = L exceeds {threshold:.1e} of total at t = {t}")]
    WallReflection { t: f64, edge_mass: f64, threshold: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("trajectory does not carry the required states: {0}")]
    MissingStates(String),

    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("checkpoint version mismatch: {0}")]
    CheckpointVersion(String),

    #[error("checkpoint truncated: {0}")]
    CheckpointTruncated(String),

    #[error("checkpoint inconsistent: {0}")]
    CheckpointInconsistent(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidInitial(_) => "invalid_initial",
            Error::DomainTooSmall { .. } => "domain_too_small",
            Error::NotOdd { .. } => "not_odd",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::NumericalFault { .. } => "numerical_fault",
            Error::WallReflection { .. } => "wall_reflection",
            Error::OutOfRange(_) => "out_of_range",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::MissingStates(_) => "missing_states",
            Error::SupportOverflow(_) => "support_overflow",
            Error::CheckpointVersion(_) => "checkpoint_version",
            Error::CheckpointTruncated(_) => "checkpoint_truncated",
            Error::CheckpointInconsistent(_) => "checkpoint_inconsistent",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    /// Errors raised while the computation itself was running, as opposed to
    /// bad input.
    pub fn is_runtime_fault(&self) -> bool {
        matches!(
            self,
            Error::NumericalFault { .. } | Error::WallReflection { .. } | Error::NonFinite { .. }
        )
    }
}

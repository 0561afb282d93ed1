use thiserror::Error;

/// Errors raised by the solver suite.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator rejected: {0}")]
    RejectedOperator(String),

    #[error("negative time {0} requested for a diffusive A-flow")]
    NegativeTimeDiffusive(f64),

    #[error(
        "blow-up guard tripped at t = {time}: H^{index} norm {norm:e} exceeds threshold {threshold:e} \
         (solution approaching its maximal existence time)"
    )]
    GuardTrip {
        time: f64,
        index: f64,
        norm: f64,
        threshold: f64,
    },

    #[error("B-flow needs {needed} substeps, more than the allowed {max}")]
    MaxSubsteps { needed: usize, max: usize },

    #[error("reference not converged: certificate {certificate:e} exceeds bound {bound:e}")]
    ReferenceNotConverged { certificate: f64, bound: f64 },

    #[error("rate fit needs at least 3 usable rows, got {0}")]
    TooFewRows(usize),

    #[error("io: {0}")]
    Io(String),

    #[error("invalid snapshot: {0}")]
    Snapshot(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

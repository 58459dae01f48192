use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoxError>;

#[derive(Debug, Error)]
pub enum CoxError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("zero events")]
    ZeroEvents,

    #[error("subsample has no events")]
    SubsampleNoEvents,

    #[error("empty risk set at event time {0}")]
    EmptyRiskSet(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Hessian singular")]
    HessianSingular,

    #[error("not converged after {iterations} iterations (max |score| = {score_norm:e}); last beta = {beta:?}")]
    NotConverged {
        iterations: usize,
        score_norm: f64,
        beta: Vec<f64>,
    },

    #[error("line search failed: log-likelihood did not increase after {0} halvings")]
    LineSearch(usize),

    #[error("degenerate censored stratum: all censored q-score norms are zero")]
    DegenerateCensoredStratum,

    #[error("pilot failed after {attempts} attempts: {last}")]
    PilotFailed {
        attempts: usize,
        last: Box<CoxError>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CoxError>,
    },
}

impl CoxError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoxError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        CoxError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with stage labels stripped.
    pub fn root(&self) -> &CoxError {
        match self {
            CoxError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, RemiError>;

#[derive(Debug, Error)]
pub enum RemiError {
    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error("column {0} has zero variance")]
    ConstantColumn(usize),

    #[error("degenerate problem: every linear coefficient is zero")]
    DegenerateProblem,

    #[error("genetic component has zero variance")]
    ZeroGeneticVariance,

    #[error("labels are degenerate: the true support is empty or covers every variable")]
    DegenerateLabels,

    #[error("input vector is constant")]
    ConstantInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: standard error must be positive and finite")]
    NonPositiveSE { path: PathBuf, line: usize },

    #[error("{path}:{line}: sample size differs from earlier rows")]
    InconsistentN { path: PathBuf, line: usize },

    #[error("{path}:{line}: row width differs from earlier rows")]
    RaggedRows { path: PathBuf, line: usize },

    #[error("{0}: bad magic, expected REMI1")]
    BadMagic(PathBuf),

    #[error("{0}: binary payload is truncated")]
    TruncatedPayload(PathBuf),

    #[error("{0}: unexpected bytes after the binary payload")]
    TrailingBytes(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl RemiError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RemiError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ValidationReport> for RemiError {
    fn from(report: ValidationReport) -> Self {
        RemiError::Validation(report)
    }
}

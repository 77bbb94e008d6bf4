use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RailError>;

#[derive(Debug, Error)]
pub enum RailError {
    #[error("class name {0:?} is already registered")]
    DuplicateClassName(String),

    #[error("domain {0:?} is already registered")]
    DuplicateDomain(String),

    #[error("unknown domain {0:?}")]
    UnknownDomain(String),

    #[error("bad magic header in {0}")]
    BadMagic(PathBuf),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in row {0}")]
    NonFiniteValue(usize),

    #[error("label out of range in row {0}")]
    LabelOutOfRange(usize),

    #[error("manifest mismatch: {0}")]
    ManifestMismatch(String),

    #[error("cannot place class means {0} radians apart in this dimension")]
    InfeasibleSeparation(f64),

    #[error("regularization must be positive, got {0}")]
    InvalidLambda(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear system is not positive definite")]
    SingularSystem,

    #[error("classes already learned: {0:?}")]
    OverlappingLabels(Vec<usize>),

    #[error("label set is empty")]
    EmptyLabelSet,

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("need at least two learned domains, got {0}")]
    InsufficientDomains(usize),

    #[error("step {step} ({domain}): {source}")]
    Step {
        step: usize,
        domain: String,
        #[source]
        source: Box<RailError>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<RailError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RailError {
    pub(crate) fn at_step(self, step: usize, domain: &str) -> Self {
        RailError::Step {
            step,
            domain: domain.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        RailError::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

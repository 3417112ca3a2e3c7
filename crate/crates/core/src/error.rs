use thiserror::Error;

/// Errors raised by geometric operations and the file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("projection onto full space")]
    ProjectionOntoFullSpace,
    #[error("degenerate oblique direction: line lies in the target hyperplane")]
    DegenerateObliqueDirection,
    #[error("points do not span the ambient space")]
    PointsDoNotSpan,
    #[error("parallel flats")]
    ParallelFlats,
    #[error("shadow boundary is a band (touching-point spread {spread:.3e})")]
    ShadowBoundaryIsBand { spread: f64 },
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid generator descriptor: field `{field}`: {reason}")]
    InvalidDescriptor { field: String, reason: String },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("nothing to report")]
    NothingToReport,
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GeomError {
    fn from(e: serde_json::Error) -> Self {
        GeomError::Format(e.to_string())
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

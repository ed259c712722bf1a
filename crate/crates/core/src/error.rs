use thiserror::Error;

/// Errors raised by the manifold kernels, graph constructors, operators and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifold mismatch: expected {expected}, found {found}")]
    ManifoldMismatch { expected: String, found: String },

    #[error("tangent vector is based at a different point")]
    BaseMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// `y` lies outside the injectivity domain of `x` (distance too close to the cut locus).
    #[error("point outside injectivity domain: distance {distance} exceeds limit {limit}")]
    NotInjective { distance: f64, limit: f64 },

    /// Adjacent values of a vertex function violate the locality requirement.
    #[error("edge ({u}, {v}) is not admissible: distance {distance} exceeds limit {limit}")]
    Inadmissible {
        u: usize,
        v: usize,
        distance: f64,
        limit: f64,
    },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from a numerical/domain failure rather than bad input or usage.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotInjective { .. } | Error::Inadmissible { .. } | Error::Domain(_)
        )
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh width {h} does not tile extent {extent}")]
    NonConformingResolution { extent: f64, h: f64 },

    #[error("oversampling margin must be positive, got {0}")]
    NonPositiveMargin(f64),

    #[error("invalid rectangle [{x0}, {x1}] x [{y0}, {y1}]")]
    InvalidRect { x0: f64, y0: f64, x1: f64, y1: f64 },

    #[error("space mismatch: expected {expected} coefficients, got {got}")]
    SpaceMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot}, value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("Friedrichs positivity violated: {0}")]
    NegativeDefinite(String),

    #[error("boundary dimension {dofs} exceeds dense cap {cap}")]
    CapExceeded { dofs: usize, cap: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("evaluation sample {0} has zero norm")]
    ZeroSample(usize),

    #[error("basis is empty")]
    EmptyBasis,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Validation errors are caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonConformingResolution { .. }
                | Error::NonPositiveMargin(_)
                | Error::InvalidRect { .. }
                | Error::InvalidConfig(_)
                | Error::CapExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

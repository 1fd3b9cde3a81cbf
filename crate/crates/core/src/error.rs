use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A pivot fell below the singularity threshold during elimination.
    #[error("matrix is singular (pivot magnitude {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    /// The rank-one update at `step` would make the matrix numerically singular.
    #[error("rank-one update {step} is singular (denominator {denominator:e})")]
    SingularUpdate { step: usize, denominator: f64 },

    #[error("rank-one update is singular at trajectory {trajectory}, step {step}")]
    SingularUpdateAt { trajectory: usize, step: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("trajectory {id} has no unmasked steps")]
    EmptyTrajectory { id: i64 },

    #[error("need at least 2 trajectories, got {n}")]
    InsufficientData { n: usize },

    #[error("line {line}: inconsistent dimension (expected {expected}, found {found})")]
    InconsistentDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no oracle value for state {state}")]
    MissingOracleValue { state: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches a trajectory index to a bare `SingularUpdate`.
    pub fn at_trajectory(self, trajectory: usize) -> Self {
        match self {
            Error::SingularUpdate { step, .. } => Error::SingularUpdateAt { trajectory, step },
            other => other,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::SingularUpdate { .. } | Error::SingularUpdateAt { .. }
        )
    }
}

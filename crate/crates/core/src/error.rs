use thiserror::Error;

pub type Result<T> = std::result::Result<T, QmargError>;

#[derive(Debug, Error)]
pub enum QmargError {
    #[error("invalid orbital space: {0}")]
    InvalidSpace(String),

    #[error("basis of {size} determinants exceeds the capacity cap {cap}")]
    Capacity { size: u128, cap: usize },

    #[error("orbital index {index} out of range 1..={d}")]
    OrbitalOutOfRange { index: usize, d: usize },

    #[error("state is not normalized (norm deviation {deviation:.3e})")]
    Unnormalized { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate spectrum: gap {gap:.3e} not above tolerance {tol:.3e}")]
    Degenerate { gap: f64, tol: f64 },

    #[error("empty determinant subset")]
    EmptySubset,

    #[error("basis truncation too severe: norm deficit {deficit:.3e}; increase the basis size")]
    NormDeficit { deficit: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QmargError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QmargError::InvalidArgument(msg.into())
    }
}

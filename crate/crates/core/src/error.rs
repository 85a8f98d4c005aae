use thiserror::Error;

/// Errors produced by the restricted-DFT toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be at least 2, got {0}")]
    InvalidGridSize(usize),

    #[error("half-width a={a} is out of range for N={n} (need 2a+1 <= N)")]
    InvalidInterval { n: usize, a: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("zero function has no support")]
    ZeroFunction,

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("lambda must be a fourth root of unity")]
    NotFourthRoot,

    #[error("J does not decouple; check a (cut entry {value:e} at ({row}, {col}))")]
    NotDecoupled { row: usize, col: usize, value: f64 },

    #[error("block is not symmetric tridiagonal: {0}")]
    NotTridiagonal(String),

    #[error("eigensolver failed to converge: {0}")]
    Convergence(String),

    #[error("spectral collision; increase precision (eigenvalue {0})")]
    SpectralCollision(f64),

    #[error("spectral pairing failed: {0}")]
    Pairing(String),

    #[error("rho_{index} not an F-eigenvector (residual {residual:e})")]
    NotFourierEigenvector { index: usize, residual: f64 },

    #[error("beta too small; ill-conditioned pair (j={j}, |beta|={beta:e})")]
    BetaTooSmall { j: usize, beta: f64 },

    #[error("eigenspace action check failed for pair {j}: {reason}")]
    EigenspaceAction { j: usize, reason: String },

    #[error("N={n} is not in the residue class required by {case}")]
    WrongResidueClass { n: usize, case: &'static str },

    #[error("tau must lie in the upper half-plane, got Im(tau)={0}")]
    InvalidTau(f64),

    #[error("degenerate Wronskian (normalized magnitude {0:e})")]
    DegenerateWronskian(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad parameters or inputs rather than by a
    /// failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidGridSize(_)
                | Error::InvalidInterval { .. }
                | Error::OutOfRange(_)
                | Error::SizeMismatch { .. }
                | Error::NotFourthRoot
                | Error::WrongResidueClass { .. }
                | Error::InvalidTau(_)
                | Error::Invalid(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

use std::path::PathBuf;

use crate::ep::EpCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not Hermitian (||H - H^dag||_F = {asymmetry:e}, limit {limit:e})")]
    NotHermitian { asymmetry: f64, limit: f64 },

    #[error("not an exceptional point: {}", .0.diagnostics)]
    NotAnEp(Box<EpCertificate>),

    #[error("Jordan chain solve failed at vector {index}: residual {residual:e}")]
    ChainSolveFailure { index: usize, residual: f64 },

    #[error("eigensolver residual {residual:e} exceeds tolerance {limit:e}")]
    DegenerateEigensolve { residual: f64, limit: f64 },

    #[error("perturbation matrix is zero")]
    ZeroPerturbation,

    #[error("eigenvector is orthogonal to the EP eigenvector (overlap {overlap:e})")]
    OrthogonalEigenvector { overlap: f64 },

    #[error("no steady state: eigenvalue imaginary part {imag:e} is positive")]
    NoSteadyState { imag: f64 },

    #[error("excitation is resonant with the EP eigenvalue (distance {distance:e})")]
    ResonanceSingular { distance: f64 },

    #[error("coupling A0 = 0 gives a diabolic point, not an exceptional point")]
    DiabolicPoint,

    #[error("could not draw a well-conditioned similarity transform after {attempts} attempts")]
    SingularTransform { attempts: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

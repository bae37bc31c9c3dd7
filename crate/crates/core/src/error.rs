use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPd,
    #[error("eigen solver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("zero set leaves no room inside the ellipsoid (effective radius {gamma_eff})")]
    Infeasible { gamma_eff: f64 },
    #[error("coordinate {index} has a non-positive box side")]
    DegenerateBox { index: usize },
    #[error("point is not inside the ellipsoid")]
    InfeasiblePoint,
    #[error("brute force supports at most {max} variables, got {n}")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("matrix is not diagonally dominant (normalized row sum {row_sum})")]
    NotDiagonallyDominant { row_sum: f64 },
    #[error("eigenvectors are not aligned closely enough (kappa * rho = {product})")]
    AlignmentTooWeak { product: f64 },
    #[error("no positive definite sample after {attempts} attempts")]
    RejectionLimit { attempts: usize },
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The matrix is positive definite but violates the uncertainty principle.
    #[error("unphysical state: symplectic eigenvalue {eigenvalue} is below the vacuum level 1")]
    Unphysical { eigenvalue: f64 },
    #[error("unphysical state: matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    /// True for the two variants that describe an unphysical covariance matrix.
    pub fn is_unphysical(&self) -> bool {
        matches!(self, Error::Unphysical { .. } | Error::NotPositiveDefinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

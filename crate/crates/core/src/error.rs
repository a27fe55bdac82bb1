use nalgebra::DMatrix;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied something outside an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A finite-precision evaluation left the representable range.
    #[error("value out of range: {0}")]
    Range(String),

    /// Inputs are valid in principle but too close to a degenerate configuration.
    #[error("ill-conditioned input: {0}")]
    Conditioning(String),

    /// An iterative or adaptive procedure ran out of budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Truncated inverse sequence did not settle before the size cap.
    #[error("truncated inverse did not converge up to size {size}: last difference {difference:e}")]
    InverseNotConverged {
        size: usize,
        difference: f64,
        last: DMatrix<f64>,
        previous: DMatrix<f64>,
    },

    /// Test function is outside the class on which the generalized functional is defined.
    #[error("test function outside the admissible decay class: {0}")]
    Inadmissible(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure is a numerical one rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Range(_)
                | Error::Convergence(_)
                | Error::InverseNotConverged { .. }
                | Error::Construction(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

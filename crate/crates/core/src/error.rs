use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: usize, right: usize },

    #[error("field is not divergence-free (max |k·û_k| / |û_k| = {0:e})")]
    NotDivergenceFree(f64),

    #[error("linear solver did not converge at step {step:?}: {iterations} iterations, relative residual {residual:e}")]
    SolverDiverged {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("sparse factorisation failed at step {step:?}: {reason}")]
    Factorization { step: Option<usize>, reason: String },

    #[error("eigensolve failed: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attach a step index to solver failures.
    pub fn at_step(self, m: usize) -> Self {
        match self {
            Error::SolverDiverged {
                iterations,
                residual,
                ..
            } => Error::SolverDiverged {
                step: Some(m),
                iterations,
                residual,
            },
            Error::Factorization { reason, .. } => Error::Factorization {
                step: Some(m),
                reason,
            },
            other => other,
        }
    }
}

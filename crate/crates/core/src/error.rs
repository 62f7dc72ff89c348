//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("antisymmetry violated: max residual {residual:.3e} > tol {tol:.3e}")]
    Antisymmetry { residual: f64, tol: f64 },

    #[error("Jacobi identity violated: max residual {residual:.3e} > tol {tol:.3e}")]
    Jacobi { residual: f64, tol: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("zero direction: the two points coincide within tolerance")]
    ZeroDirection,

    #[error("degenerate direction: no eigenvalue gap above {gap_tol:.3e}")]
    DegenerateDirection { gap_tol: f64 },

    #[error("geometry violation: {0}")]
    GeometryViolation(String),

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("flow stalled: no decrease at step {step} (grad norm {grad_norm:.3e}, step size {step_size:.3e})")]
    StalledFlow {
        step: usize,
        grad_norm: f64,
        step_size: f64,
    },

    #[error("not a critical point: {0}")]
    NotACriticalPoint(String),

    #[error("degenerate involution: eigenvalue {eigenvalue} is off ±1 by more than {tol:.3e}")]
    DegenerateInvolution { eigenvalue: f64, tol: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("unknown corpus algebra '{0}'")]
    UnknownCorpus(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

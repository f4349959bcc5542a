use thiserror::Error;

/// Errors raised by the Bloch-vector library.
#[derive(Debug, Error)]
pub enum BlochError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or element counts do not match what the operation needs.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The Bloch vector does not describe a density matrix.
    #[error(
        "not a state: negative-part norm {negative_part_norm:.3e} exceeds threshold {threshold:.3e}"
    )]
    NotAState {
        negative_part_norm: f64,
        threshold: f64,
    },

    #[error("purity required: tr(rho^2) = {purity:.12} differs from 1")]
    PurityRequired { purity: f64 },

    #[error("dissipator {index} has negative rate gamma = {gamma}")]
    NegativeRate { index: usize, gamma: f64 },

    /// Integrated state left the Bloch body beyond tolerance.
    #[error("state left the Bloch body at t = {time}: negative-part norm {negative_part_norm:.3e} (threshold {threshold:.3e})")]
    MembershipLost {
        time: f64,
        negative_part_norm: f64,
        threshold: f64,
    },

    #[error("step size underflow: dt = {dt:.3e} did not reach tolerance {tol:.1e} (last halving changed the endpoint by {change:.3e})")]
    StepUnderflow { dt: f64, tol: f64, change: f64 },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid operator tuple: {0}")]
    InvalidTuple(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BlochError>;

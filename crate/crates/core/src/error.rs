use thiserror::Error;

use crate::packets::Species;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("convention check `{check}` failed: residual {residual:e} exceeds {tolerance:e}")]
    Convention {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("species mismatch: expected {expected}, found {found:?}")]
    Species { expected: String, found: Species },

    #[error("quadrature did not converge: change {change:e} > {tolerance:e} at order {order}")]
    Quadrature {
        change: f64,
        tolerance: f64,
        order: usize,
    },

    #[error("Gram matrix is not positive semi-definite: min eigenvalue {min_eigenvalue:e}, norm {norm:e}")]
    PsdViolation { min_eigenvalue: f64, norm: f64 },

    #[error("identity `{name}` failed: residual {residual:e} exceeds {tolerance:e}")]
    IdentityFailure {
        name: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("operands live on different mode spaces")]
    ModeMismatch,

    #[error("operation requires {0} statistics")]
    Statistics(&'static str),

    #[error("polynomial degree {degree} exceeds the safe interior of cutoff {cutoff}")]
    Cutoff { degree: usize, cutoff: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("expression is not presented as a product of bilinears: {0}")]
    Presentation(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("log-log fit residual {residual:.3} exceeds {tolerance:.3}")]
    Fit { residual: f64, tolerance: f64 },

    #[error("state axiom `{axiom}` violated: {value:e}")]
    StateAxiom { axiom: String, value: f64 },

    #[error("flow mismatch at t = {t}: residual {residual:e}")]
    FlowMismatch { t: f64, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

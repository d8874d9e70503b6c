use thiserror::Error;

/// Errors raised while building or solving a model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("off-resonant elimination invalid: |U| = {u_abs} must exceed {bound}")]
    Validity { u_abs: f64, bound: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("sign: {0}")]
    Sign(String),

    #[error("pair ({i}, {j}) is not a valid pair for {n_qubits} qubits")]
    Index { i: usize, j: usize, n_qubits: usize },

    #[error("domain: {0}")]
    Domain(String),

    #[error("no bound state below the scattering edge at K = {k}")]
    NoBoundState { k: f64 },

    #[error("eigensolver did not converge: {message} (max residual {residual:e})")]
    Convergence { message: String, residual: f64 },

    #[error("basis mismatch: expected dimension {expected}, found {found}")]
    BasisMismatch { expected: usize, found: usize },

    #[error("no interior minimum in [{lo}, {hi}] (best at {at})")]
    Bracket { lo: f64, hi: f64, at: f64 },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    Size { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

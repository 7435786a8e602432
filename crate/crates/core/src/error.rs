use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The denominator Laguerre factor of f(n) vanished or left the representable range.
    #[error("nonlinear function is singular at n = {n}: L_n^{j}({x}) is zero or underflows")]
    SingularFunction { n: u64, j: u32, x: f64 },

    #[error("state truncation did not converge within n_cap = {n_cap} (achieved tail estimate {achieved_tail:e})")]
    NotConverged { n_cap: usize, achieved_tail: f64 },

    #[error("Wigner double sum did not stabilise (last-shell contribution {residual:e}); rebuild the table with a smaller tolerance")]
    WignerNotConverged { residual: f64 },

    #[error("expectation value undefined for the vacuum state (<N> = 0)")]
    VacuumState,

    #[error("insufficient Fock-space headroom: {0}")]
    InsufficientHeadroom(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

/// Errors raised by the solvers and their input validation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("window exhausted: no eigenvalue for k={k}, i={i} bracketed in [{lo}, {hi}]")]
    WindowExhausted { k: usize, i: usize, lo: f64, hi: f64 },

    #[error("integrator step failure at t={t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("sign profile violated: {0}")]
    SignProfile(String),

    #[error("inverse iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-principal mode: eigenvector component {value:e} at node {node} is not positive")]
    NonPrincipal { node: usize, value: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("irreducibility failure: min G = {min_g:e} after solve")]
    Irreducibility { min_g: f64 },

    #[error("logarithmic branch: recovered h1 = {h1} at t = {t} is incompatible with h1(0) = 0")]
    LogarithmicBranch { t: f64, h1: f64 },

    #[error("mode (k={k}, i={i}): {source}")]
    Mode {
        k: usize,
        i: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

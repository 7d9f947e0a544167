use thiserror::Error;

/// Errors produced by the simulation and analysis kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ML search space too large: {required} hypotheses required, {allowed} allowed")]
    Capacity { required: f64, allowed: u64 },

    #[error("numeric non-convergence: best estimate {estimate:e}, error bound {error_bound:e}")]
    NonConvergence { estimate: f64, error_bound: f64 },

    /// Partial-fraction weights divide by `1/mu_i - 1/mu_j`; equal scales make them undefined.
    #[error(
        "degenerate path scales: mu[{first}] = {a:e} and mu[{second}] = {b:e} are not distinct \
         (the Gamma-mixture expansion requires pairwise distinct scales)"
    )]
    DegenerateScales {
        first: usize,
        second: usize,
        a: f64,
        b: f64,
    },

    /// Interference variance is zero; callers should use the interference-free expression.
    #[error("no interference: variance is zero, use the interference-free error rate")]
    NoInterference,

    #[error("insufficient errors: BER at {snr_db} dB is zero or missing")]
    InsufficientErrors { snr_db: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

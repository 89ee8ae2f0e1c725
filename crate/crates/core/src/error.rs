use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative evaluation stopped before reaching its tolerance. Carries
    /// the best available estimate and its error bound.
    #[error("accuracy not reached: {what} (estimate {estimate:e}, error bound {error_bound:e})")]
    Accuracy {
        what: String,
        estimate: f64,
        error_bound: f64,
    },

    /// An object was used before a required setup step (e.g. calibration).
    #[error("state error: {0}")]
    State(String),

    /// A standing hypothesis on the coefficients is violated (e.g. α ≤ 2s).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("stability: {0}")]
    Stability(String),

    /// A limiting process ran out of levels or time; `trace` holds the
    /// successive differences observed.
    #[error("no convergence: {what} (trace {trace:?})")]
    NonConvergence { what: String, trace: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

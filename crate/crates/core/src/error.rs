use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side precondition (normalization, shape) was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The integrator could not keep the trajectory unitary.
    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The mean spin along x is too small for the Wineland parameter to be defined.
    #[error("contrast undefined: |<Sx>| = {contrast:e} is below threshold")]
    ContrastUndefined { contrast: f64 },

    #[error("not found: {0}")]
    NotFound(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

use alloc::string::String;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A metric evaluation produced something that is not a Riemannian metric.
    #[error("geometry error: {message} (eigenvalue {eigenvalue:e})")]
    Geometry { message: String, eigenvalue: f64 },

    /// An argument fell outside the domain of the operation, e.g. `r <= 0`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or unsupported parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid grid description.
    #[error("grid error: {0}")]
    Grid(String),

    /// The implicit time step failed.
    #[error("step {step} failed at t = {time}: {message} (residual {residual:e})")]
    Step { step: usize, time: f64, residual: f64, message: String },

    /// A decay-rate fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// The damping-weighted denominator of an observability ratio vanished.
    #[error("observability ratio is vacuous: numerator {numerator:e}, denominator {denominator:e}")]
    Observability { numerator: f64, denominator: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

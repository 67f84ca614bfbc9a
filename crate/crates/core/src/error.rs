use thiserror::Error;

/// Errors shared by all toolkit modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sampling grid")]
    EmptyGrid,

    #[error("domain error: {0}")]
    Domain(String),

    /// The quadrature hit a point where the integrand is not finite,
    /// usually because the diffusion coefficient vanishes inside the
    /// integration interval.
    #[error("singular integrand at y = {location}: {detail}")]
    SingularIntegrand { location: f64, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// The Euler-Maruyama state left the finite range.
    #[error("simulation produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

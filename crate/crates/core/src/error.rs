use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The closed-form transfer relations only exist on resonance.
    #[error("operation requires zero detuning, got delta = {delta}")]
    DetuningUnsupported { delta: f64 },

    #[error("frequency-domain system matrix is singular at omega = {omega}")]
    Singular { omega: f64 },

    #[error("polynomial root iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

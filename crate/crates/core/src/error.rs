use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative or series method did not converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// Vector or grid sizes do not agree.
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    /// Exterior data violates its declared growth envelope.
    #[error("growth envelope violated at radius {radius} (|g| = {value}, bound = {bound})")]
    Growth { radius: f64, value: f64, bound: f64 },
    /// A moment of a heavy-tailed law does not exist.
    #[error("moment of order {order} diverges for beta = {beta}")]
    Divergent { order: u32, beta: f64 },
    /// The conjugate gradient iteration hit its cap.
    #[error("linear solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    /// A Fourier-Laplace denominator vanished.
    #[error("pole: |1 - phi*psi| = {0:e}")]
    Pole(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by evaluation, quadrature and the finite-difference solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point: field point coincides with the source at ({x}, {y})")]
    SingularPoint { x: f64, y: f64 },

    #[error("invalid coefficients: {0}")]
    Coefficients(String),

    #[error(
        "quadrature cell budget exceeded after {cells} cells \
         (best estimate {estimate:e}, error estimate {error:e})"
    )]
    BudgetExceeded {
        cells: usize,
        estimate: f64,
        error: f64,
    },

    #[error("unsupported region: {0}")]
    Region(String),

    #[error("M-matrix violation at row {row}: {detail}")]
    MMatrix { row: usize, detail: String },

    #[error("linear solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("record parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("element {element} has non-positive Jacobian")]
    DegenerateElement { element: usize },

    #[error("factorization failed at pivot {pivot}")]
    Factorization { pivot: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("fixed-point iteration did not converge in {iterations} steps; period trajectory {trajectory:?}")]
    FixedPointNonConvergence {
        iterations: usize,
        trajectory: Vec<f64>,
    },

    #[error("strip too short: far end lifts by {lift:e} m")]
    StripTooShort { lift: f64 },

    #[error("contact active set did not settle after {iterations} iterations")]
    ActiveSetNonConvergence { iterations: usize },

    #[error("neutral-axis equilibrium failed at rotation {rotation:e}: residuals {residuals:?}")]
    Equilibrium { rotation: f64, residuals: Vec<f64> },

    #[error("Newton iteration did not converge at step {step}")]
    NewtonNonConvergence { step: usize },

    #[error("non-finite response at step {step}")]
    NonFinite { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the failure is a numerical one (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_) | Error::Config(_) | Error::Parse { .. } | Error::Io(_)
        )
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("quadrature did not converge: value {value:e}, error estimate {error_estimate:e} after {evaluations} evaluations")]
    QuadratureNotConverged { value: f64, error_estimate: f64, evaluations: usize },

    #[error("self-consistent linewidth did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointNotConverged { iterations: usize, residual: f64 },

    #[error("least-squares fit did not converge after {iterations} iterations")]
    FitNotConverged { iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("not enough data: need at least {required}, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("traces do not share a common detuning grid")]
    GridMismatch,

    #[error("singular linear system")]
    SingularSystem,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}

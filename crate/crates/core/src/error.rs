use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation's ordering precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge after {intervals} subintervals (error estimate {err_estimate:e})")]
    QuadratureNonConvergence { intervals: usize, err_estimate: f64 },

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("logistic fit did not converge within {iterations} iterations")]
    FitNonConvergence { iterations: usize },

    #[error("perfect separation: coefficient magnitude exceeded {limit:e} at iteration {iteration}")]
    PerfectSeparation { iteration: usize, limit: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of a numerical routine to converge, as opposed to
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::NonFiniteIntegrand { .. }
                | Error::FitNonConvergence { .. }
                | Error::PerfectSeparation { .. }
        )
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_nonneg(name: &'static str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::invalid(name, format!("must be >= 0, got {value}")));
    }
    Ok(value)
}

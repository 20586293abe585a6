use thiserror::Error;

/// Errors produced by parameter validation and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {estimate:e}, error estimate {err_est:e})"
    )]
    Convergence {
        estimate: f64,
        err_est: f64,
        subdivisions: usize,
    },

    #[error("secrecy outage exponent J1 + J2 - J3 = {value:e} is negative beyond its error estimate {err_est:e}")]
    NegativeExponent { value: f64, err_est: f64 },

    #[error("secrecy outage is not monotone in R_e: P_so({lower}) = {p_lower} < P_so({upper}) = {p_upper}")]
    NonMonotone {
        lower: f64,
        upper: f64,
        p_lower: f64,
        p_upper: f64,
    },

    #[error("{term} closed form {closed:e} disagrees with quadrature {quadrature:e}")]
    ClosedFormMismatch {
        term: &'static str,
        closed: f64,
        quadrature: f64,
    },

    #[error("no finite bracket for the secrecy outage constraint within R_e <= {limit}")]
    NoBracket { limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

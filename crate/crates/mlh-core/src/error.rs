//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a domain invariant (positivity, range, ...).
    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An input that must be finite was NaN or infinite.
    #[error("non-finite input {name}: {value}")]
    NonFinite { name: &'static str, value: f64 },

    /// Requested order exceeds the supported cap.
    #[error("order {order} exceeds cap {cap}")]
    OrderCap { order: usize, cap: usize },

    /// Transition densities are only defined for strictly positive time.
    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),

    /// The two-interface closed form requires rho_2 sqrt(a_2) = rho_3 sqrt(a_3),
    /// equivalently beta = 1 - q/r.
    #[error("matching condition rho2*sqrt(a2) = rho3*sqrt(a3) violated (beta = {beta}, 1 - q/r = {expected}); no closed form, use the expansion or Monte Carlo")]
    MatchingCondition { beta: f64, expected: f64 },

    /// Operation requires a point away from the interfaces 0 and a.
    #[error("x = {0} lies on an interface; use the interface-moment routine")]
    AtInterface(f64),

    /// Operation is only defined at an interface point.
    #[error("x = {0} is not an interface point")]
    NotAnInterface(f64),

    /// Initial data cannot supply a derivative of the requested order.
    #[error("derivative of order {order} unavailable for piece {piece}")]
    DerivativeOrder { piece: usize, order: usize },

    /// Numerical inversion of a CDF failed to converge.
    #[error("CDF inversion did not converge within {max_iter} bisection steps (tol {tol})")]
    InversionFailure { max_iter: usize, tol: f64 },

    /// Linear solve produced a non-finite value.
    #[error("tridiagonal solve produced a non-finite value at cell {cell}")]
    SolveFailure { cell: usize },

    /// Invalid sampler or solver configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Malformed JSON descriptor.
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
}

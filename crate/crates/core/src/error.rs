use thiserror::Error;

/// Errors raised by the numerical operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The unperturbed center: every orbit is periodic, so fixed points of the
    /// return map are not isolated.
    #[error("degenerate family: epsilon = 0 makes every orbit periodic")]
    DegenerateFamily,

    #[error("trial invalid: {0}")]
    TrialInvalid(String),

    #[error("degenerate tangency: <F, x> vanishes identically on the circle r = {radius}")]
    DegenerateTangency { radius: f64 },

    #[error("degenerate polynomial: {0}")]
    DegeneratePolynomial(String),

    #[error("truncation error bound {bound:e} exceeds tolerance {tolerance:e} at radius {radius}")]
    Truncation {
        bound: f64,
        tolerance: f64,
        radius: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

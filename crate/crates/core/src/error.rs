use thiserror::Error;

/// Errors produced by validation and parameter checks.
///
/// Every variant names the violated invariant so callers can surface the
/// failure without re-deriving it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must be a finite nonnegative real, got {0}")]
    BadEpsilon(f64),

    #[error("delta must lie in [0, 1], got {0}")]
    BadDelta(f64),

    #[error("zCDP spend must declare delta = 0, got {0}")]
    ZcdpNonzeroDelta(f64),

    #[error("{name} must be {constraint}, got {value}")]
    BadParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("boundary is trivial below the starting intrinsic time: v = {v} < v0 = {v0}")]
    BelowStartingTime { v: f64, v0: f64 },

    #[error("pDP conversion is undefined at epsilon = 0")]
    ZeroEpsilonConversion,

    #[error("epsilon and delta sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name,
            constraint: "a finite positive real",
            value,
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name,
            constraint: "a finite nonnegative real",
            value,
        })
    }
}

/// Confidence parameters live in the open unit interval.
pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name,
            constraint: "in the open interval (0, 1)",
            value,
        })
    }
}

use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("derivative order {0} is not supported (maximum is 5)")]
    UnsupportedOrder(usize),

    #[error("operation requires an autonomous nonlinearity")]
    NotAutonomous,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no bracket for nu within [-{radius}, {radius}]; nonlinearity may be wild")]
    TamenessViolation { radius: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("{x0} is not a fixed point of the return map (residual {residual:e})")]
    NotFixedPoint { x0: f64, residual: f64 },

    #[error("solution blew up inside the finite-difference stencil around {x0}")]
    StencilBlowUp { x0: f64 },

    #[error("trajectory from {x0} blew up to {sign}inf at t = {time}")]
    BlowUp { x0: f64, sign: char, time: f64 },

    #[error("bracket search failed: {0}")]
    BracketFailure(String),

    #[error("anchors do not admit a non-negative plateau solution (residual {residual:e})")]
    AnchorsInsufficient { residual: f64 },

    #[error("sign of f at {end} infinity is not uniform in t")]
    PropernessUndetermined { end: &'static str },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

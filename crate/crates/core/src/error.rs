use num_complex::Complex64;
use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reason an expression could not be evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalFault {
    DivisionByZero,
    LogOfZero,
    /// `0^b` with `Re(b) <= 0` and `b != 0`.
    ZeroPower,
}

impl std::fmt::Display for EvalFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvalFault::DivisionByZero => "division by zero",
            EvalFault::LogOfZero => "ln(0)",
            EvalFault::ZeroPower => "zero raised to a non-positive power",
        })
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("evaluation error at t = {t}: {fault}")]
    Eval { t: Complex64, fault: EvalFault },

    #[error("ODE order must be at least 2, got {0}")]
    InvalidOrder(usize),

    #[error("expected {expected} entries for {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gauge is singular at t = {t}: |D| = {det_abs:e}")]
    SingularGauge { t: f64, det_abs: f64 },

    #[error("linear solve failed at t = {t} (condition estimate {condition:e})")]
    LinearSolve { t: f64, condition: f64 },

    #[error("characteristic roots {i} and {j} collide at t = {t}")]
    RootCollision { t: f64, i: usize, j: usize },

    #[error("Riccati-type gauge blew up at t = {t}")]
    RiccatiBlowup { t: f64 },

    #[error("q vanishes at t = {t}")]
    ZeroQ { t: f64 },

    #[error("coefficient vanishes at t = {t} (turning point)")]
    ZeroCoefficient { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("maximum number of steps ({steps}) exceeded at t = {t}")]
    MaxSteps { t: f64, steps: usize },

    #[error("solution exceeded the blow-up cap at t = {t}")]
    BlowUp { t: f64 },

    #[error("quadrature on [{a}, {b}] did not converge within the subdivision limit")]
    MaxDepth { a: f64, b: f64 },

    #[error("trajectories are not sampled on a common grid")]
    GridMismatch,

    #[error("trajectories have no overlapping span")]
    EmptyOverlap,

    #[error("unsupported order {order} for {what}")]
    UnsupportedOrder { what: &'static str, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short name of the failure kind, used in CLI messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::Eval { .. } => "EvalError",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::SingularGauge { .. } => "SingularGauge",
            Error::LinearSolve { .. } => "LinearSolve",
            Error::RootCollision { .. } => "RootCollision",
            Error::RiccatiBlowup { .. } => "RiccatiBlowup",
            Error::ZeroQ { .. } => "ZeroQ",
            Error::ZeroCoefficient { .. } => "ZeroCoefficient",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::MaxSteps { .. } => "MaxSteps",
            Error::BlowUp { .. } => "BlowUp",
            Error::MaxDepth { .. } => "MaxDepth",
            Error::GridMismatch => "GridMismatch",
            Error::EmptyOverlap => "EmptyOverlap",
            Error::UnsupportedOrder { .. } => "UnsupportedOrder",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// The time at which a numerical failure occurred, when known.
    pub fn time(&self) -> Option<f64> {
        match *self {
            Error::Eval { t, .. } => Some(t.re),
            Error::SingularGauge { t, .. }
            | Error::LinearSolve { t, .. }
            | Error::RootCollision { t, .. }
            | Error::RiccatiBlowup { t }
            | Error::ZeroQ { t }
            | Error::ZeroCoefficient { t }
            | Error::StepUnderflow { t }
            | Error::MaxSteps { t, .. }
            | Error::BlowUp { t } => Some(t),
            _ => None,
        }
    }
}

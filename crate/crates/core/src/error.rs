use thiserror::Error;

/// Every failure the library can report.
///
/// The CLI maps these onto exit codes through [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("boost parameter {beta} outside [0, {beta_max}]")]
    BoostOutOfRange { beta: f64, beta_max: f64 },
    #[error("phase list is empty")]
    EmptyPhaseList,
    #[error("phase {index} is not finite")]
    NonFinitePhase { index: usize },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("rotation angle undefined: Re(a11) = {0}")]
    DegenerateRotation(f64),
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("polynomial is not completable: {0}")]
    NotCompletable(String),
    #[error("factorization failed: {0}")]
    FactorizationFailed(String),
    #[error("layer stripping stalled with {remaining} layers left: {reason}")]
    StrippingStalled { remaining: usize, reason: String },
    #[error("target violates |A| <= 1 at x = {x} (|A| = {value})")]
    TargetExceedsBound { x: f64, value: f64 },
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("not a mode transform (pseudo-unitary defect {0:e})")]
    NotModeTransform(f64),
    #[error("quadrature order {order} cannot integrate degree {degree} exactly")]
    QuadratureOrder { order: usize, degree: usize },
    #[error("basis degenerates at degree {degree} (relative pivot {pivot:e})")]
    DegenerateBasis { degree: usize, pivot: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Infeasible,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotCompletable(_)
            | Error::FactorizationFailed(_)
            | Error::StrippingStalled { .. }
            | Error::TargetExceedsBound { .. } => ErrorKind::Infeasible,
            Error::Internal(_) => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

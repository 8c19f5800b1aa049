use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not skew-symmetric (|S + S^T|_F = {asymmetry:e})")]
    NotSkewSymmetric { asymmetry: f64 },

    #[error("matrix is not a rotation (|R^T R - I|_F = {orthogonality:e}, det = {det})")]
    NotARotation { orthogonality: f64, det: f64 },

    #[error("matrix cannot be projected onto SO(3): {0}")]
    Degenerate(&'static str),

    #[error("rotor allocation is singular (d = {arm_length}, c_tau_f = {torque_coefficient})")]
    SingularAllocation {
        arm_length: f64,
        torque_coefficient: f64,
    },

    #[error("invalid vehicle parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: &'static str },

    #[error("gain `{name}` must be positive (got {value})")]
    NonPositiveGain { name: &'static str, value: f64 },

    #[error("gain `{name}` = {value} is outside {range}")]
    PsiOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("large-angle certificate needs psi1 < 1 <= psi2 < 2 (psi1 = {psi1}, psi2 = {psi2})")]
    PsiOrdering { psi1: f64, psi2: f64 },

    #[error("commanded thrust vector vanishes (|A| = {norm:e})")]
    DegenerateThrust { norm: f64 },

    #[error("desired heading b1d is parallel to the thrust axis (|b3c x b1d| = {norm:e})")]
    HeadingParallel { norm: f64 },

    #[error("rate estimation needs at least 2 samples, got {have}")]
    InsufficientHistory { have: usize },

    #[error("state component exceeded {limit:e}")]
    NumericalBlowup { limit: f64 },

    #[error("initial attitude error Psi(0) = {psi} is not below {limit} for this flight mode")]
    InitialAttitudeError { psi: f64, limit: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("at t = {t:.6} s: {source}")]
    AtTime { t: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Self {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }

    /// Strips any `AtTime` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

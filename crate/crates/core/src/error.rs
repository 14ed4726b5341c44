use thiserror::Error;

/// Failures raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Domain(String),

    #[error("contour passes within {distance:e} of a zero of cosh")]
    CoshZero { distance: f64 },

    #[error("no PT-consistent shift y <= 0 exists for family alpha_R = {alpha_r} at alpha = {alpha}")]
    NoAdmissibleShift { alpha_r: u32, alpha: f64 },

    #[error("determinant lost reality at E = {energy}: |Im D| / |D| = {ratio:e}")]
    LossOfReality { energy: f64, ratio: f64 },

    #[error("no sign change of Re D on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("inverse iteration did not converge after {0} iterations")]
    InverseIteration(usize),

    #[error("alpha step collapsed below {min_step:e} near alpha = {alpha} on level {level}")]
    StepCollapse { alpha: f64, level: usize, min_step: f64 },

    #[error("hankel root search failed: {0}")]
    NoConvergence(String),

    #[error("singular jacobian in the hankel newton step")]
    SingularJacobian,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

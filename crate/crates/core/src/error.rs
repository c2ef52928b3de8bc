use thiserror::Error;

/// Errors raised by the model, the discretization and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MelanError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid load profile: {0}")]
    InvalidLoad(String),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid functions live on different meshes ({left} vs {right} intervals)")]
    MeshMismatch { left: usize, right: usize },

    #[error("coordinate {x} outside the span [0, {length}]")]
    OutOfRange { x: f64, length: f64 },

    #[error("singular linear system at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("Newton iteration diverged after {iterations} iterations (last defect {defect:e})")]
    NewtonDiverged { iterations: usize, defect: f64 },

    #[error("no sign change of the fixed-point residual in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("direction is identically zero")]
    DegenerateDirection,

    #[error("uniqueness condition c*alpha^2 < 1 violated (c*alpha^2 = {c_alpha2})")]
    ConditionViolated { c_alpha2: f64 },

    #[error("contraction failed: step ratios exceeded 1 for {steps} consecutive steps")]
    NoContraction { steps: usize },
}

pub type Result<T> = std::result::Result<T, MelanError>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MelanError::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(MelanError::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}

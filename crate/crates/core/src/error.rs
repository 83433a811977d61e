use thiserror::Error;

/// Errors produced by the control and simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The flat-output to input map is singular (|v| below the guard).
    #[error("singular flat point: |v| = {speed:e} is below the guard {v_min}")]
    SingularFlatPoint { speed: f64, v_min: f64 },

    /// A scenario, gain set or trajectory failed validation.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("cannot compare reports from different scenarios (`{left}` vs `{right}`)")]
    ScenarioMismatch { left: String, right: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Field path for validation errors, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

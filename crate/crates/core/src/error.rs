use thiserror::Error;

pub type Result<T> = std::result::Result<T, PabiError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PabiError {
    /// A parameter is outside its domain (negative distance, p > 1, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A regime condition of a bound does not hold, e.g. the stepsize
    /// threshold `1/eta >= theta`. `required_value` is the threshold the
    /// caller has to meet, when there is a single number to report.
    #[error("precondition `{code}` violated: {message}")]
    Precondition {
        code: &'static str,
        message: String,
        required_value: Option<f64>,
    },

    #[error("length mismatch for `{name}`: expected {expected}, got {actual}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("numeric oracle did not converge: {0}")]
    NotConverged(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

impl PabiError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        PabiError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(
        code: &'static str,
        message: impl Into<String>,
        required_value: Option<f64>,
    ) -> Self {
        PabiError::Precondition {
            code,
            message: message.into(),
            required_value,
        }
    }

    /// Short machine-readable code, used by the CLI error report.
    pub fn code(&self) -> &'static str {
        match self {
            PabiError::InvalidParameter { .. } => "invalid_parameter",
            PabiError::Precondition { code, .. } => code,
            PabiError::LengthMismatch { .. } => "length_mismatch",
            PabiError::NotConverged(_) => "not_converged",
            PabiError::InsufficientSamples(_) => "insufficient_samples",
        }
    }

    /// True for errors caused by the caller's input rather than by a
    /// numerical failure inside the library.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, PabiError::NotConverged(_))
    }
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(PabiError::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(PabiError::invalid(
            name,
            format!("must be finite and >= 0, got {value}"),
        ))
    }
}

pub(crate) fn require_unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(PabiError::invalid(
            name,
            format!("must lie in [0, 1], got {value}"),
        ))
    }
}

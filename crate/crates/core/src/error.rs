use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("Re(s) = {re} lies outside the convergence strip ({lo}, {hi}) of the {kind} transform")]
    OutsideStrip {
        kind: &'static str,
        re: f64,
        lo: f64,
        hi: f64,
    },

    #[error("Levy exponent evaluated within {distance:e} of the pole at {pole}")]
    PoleProximity { pole: f64, distance: f64 },

    #[error("truncation bound not met with {max_terms} terms (bound {bound:e}, target {target:e})")]
    TruncationCap {
        max_terms: usize,
        bound: f64,
        target: f64,
    },

    #[error("discretization control failed after {doublings} doublings of C: last values {previous} and {last}")]
    Discretization {
        doublings: u32,
        previous: f64,
        last: f64,
    },

    #[error("haircut target unattainable: {0}")]
    Unattainable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{failed} of {total} density inversions failed")]
    InversionFailures { failed: usize, total: usize },

    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationCap { .. }
                | Error::Discretization { .. }
                | Error::InversionFailures { .. }
                | Error::PoleProximity { .. }
        )
    }
}

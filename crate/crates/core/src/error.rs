use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("four-well structure lost: found {found} local minima")]
    FourWellLost { found: usize },

    #[error("computational basis undefined: no state with well weight >= {threshold} in well {well}")]
    ComputationalBasisUndefined { well: &'static str, threshold: f64 },

    #[error("grid configuration: {0}")]
    Grid(String),

    #[error("eigensolver failed on a {0}x{0} problem")]
    Eigensolver(usize),

    #[error("no drive coupling between |10> and |11> (|O_34| = {0:e})")]
    NoCoupling(f64),

    #[error("integration contract not met after {refinements} step halvings (final-amplitude change {change:e})")]
    IntegrationFailure { refinements: u32, change: f64 },

    #[error("norm drift {drift:e} exceeds {tolerance:e} over {steps} steps")]
    NormDrift { drift: f64, tolerance: f64, steps: usize },

    #[error("map grids differ: {0}")]
    GridMismatch(String),

    #[error("config `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("i/o on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { key: key.into(), reason: reason.into() }
    }

    /// Configuration-class failures map to CLI exit code 1, numeric ones to 2.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Grid(_)
                | Error::GridMismatch(_)
                | Error::Config { .. }
                | Error::Io { .. }
        )
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("index {index} out of range (n_modes = {n_modes})")]
    IndexOutOfRange { index: usize, n_modes: usize },

    #[error("n_modes = {requested} exceeds the {available} bound states of this potential")]
    TooManyModes { requested: usize, available: usize },

    #[error("x = {x} lies outside the domain [{x_min}, {x_max}]")]
    OutsideDomain { x: f64, x_min: f64, x_max: f64 },

    #[error("coefficient set has {got} amplitudes but the basis has {expected} modes")]
    BasisMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    /// Whether the error comes from validating user input rather than from the
    /// numerics or the filesystem.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidParameter { .. }
                | Error::TooManyModes { .. }
                | Error::Empty(_)
        )
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("only {found} occupied sites within {radius_nm} nm, {required} required; enlarge the generation radius")]
    InsufficientSites {
        found: usize,
        required: usize,
        radius_nm: f64,
    },

    #[error("no realization passed the exclusion-zone post-selection after {attempts} attempts")]
    RejectionLimit { attempts: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("brute-force oracle limited to {max} bath spins, got {n}")]
    TooManySpins { n: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

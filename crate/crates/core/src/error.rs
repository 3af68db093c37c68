use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("query ({x}, {y}, t={t}) outside the field domain")]
    OutOfDomain { x: f64, y: f64, t: f64 },

    #[error("format error at `{key}`: {msg}")]
    Format { key: String, msg: String },

    #[error("solver diverged at t={t}")]
    SolverDiverged { t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable snake_case code for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::Format { .. } => "format",
            Error::SolverDiverged { .. } => "solver_diverged",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn format_err(key: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Format {
        key: key.into(),
        msg: msg.into(),
    }
}

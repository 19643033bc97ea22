use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The biased integrand stayed non-positive long enough that the
    /// integrator can never reach its threshold.
    #[error("infeasible bias: encoder cannot fire after t = {time}")]
    Infeasible { time: f64 },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("format error: replayed interval {index} is non-positive ({value})")]
    NonPositiveInterval { index: usize, value: f64 },

    #[error("degenerate system: all singular values below cutoff")]
    DegenerateSystem,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed weight descriptor or function spec; `pos` is a byte offset.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not reach the requested tolerance.
    #[error("accuracy not reached: {msg} (best estimate {estimate:e}, achieved {achieved:e})")]
    Accuracy {
        msg: String,
        estimate: f64,
        achieved: f64,
    },

    /// An integral whose partial sums keep growing.
    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy { .. })
    }
}

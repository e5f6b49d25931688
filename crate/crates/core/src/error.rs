use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("regions overlap or touch at resolution {resolution}: regions {i} and {j}")]
    Overlap { i: usize, j: usize, resolution: f64 },
    #[error("part {part} is not supported in its region (leak {leak:.3e} at {at:?})")]
    Leak { part: usize, leak: f64, at: Point },
    #[error("non-finite value while evaluating at {0:?}")]
    NonFinite(Point),
    #[error("orbit left the domain at step {step}")]
    Escape { step: usize },
    #[error("no return within {0} iterates")]
    NoReturn(usize),
    #[error("precondition violated: orbit point {index} lies inside the support neighbourhood")]
    Precondition { index: usize },
    #[error("certificate failed at link {link}: {reason}")]
    Certificate { link: usize, reason: String },
    #[error("inconsistent bounds: certificate {cert} exceeds Lipschitz bound {lip}")]
    Inconsistent { cert: f64, lip: f64 },
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

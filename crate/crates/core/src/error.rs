use thiserror::Error;

use crate::autodiff::JetError;
use crate::geometry::SamplePoint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error at {point}: {reason}")]
    Domain { point: String, reason: String },
    #[error("degenerate metric tensor at {point}: {reason}")]
    Degenerate { point: String, reason: String },
    #[error("dimension error: need n >= 3, got {0}")]
    Dimension(usize),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("unknown metric id {0:?}")]
    UnknownMetric(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(point: &SamplePoint, reason: impl ToString) -> Self {
        Error::Domain {
            point: point.to_string(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn degenerate(point: &SamplePoint, reason: impl ToString) -> Self {
        Error::Degenerate {
            point: point.to_string(),
            reason: reason.to_string(),
        }
    }
}

pub(crate) trait AtPoint<T> {
    fn at(self, point: &SamplePoint) -> Result<T>;
}

impl<T> AtPoint<T> for std::result::Result<T, JetError> {
    fn at(self, point: &SamplePoint) -> Result<T> {
        self.map_err(|e| Error::domain(point, e))
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("index window [{start}, {end}) is outside a series of length {len}")]
    OutOfBounds { start: usize, end: usize, len: usize },

    #[error("series do not overlap after alignment")]
    NoOverlap,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("degenerate variance: the series is constant")]
    DegenerateVariance,

    #[error("not mean reverting: AR(1) coefficient {0} lies outside (0, 1)")]
    NotMeanReverting(f64),

    #[error("exponential autocorrelation fit failed: {0}")]
    FitFailure(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("ill-conditioned calibration: {0}")]
    IllConditioned(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{failed} of {total} replicate estimations failed (limit is 20%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: PathBuf, date: String },

    #[error("{path}: dates are not increasing at {date}")]
    Unordered { path: PathBuf, date: String },

    #[error("{path}: missing dates {}", .dates.join(", "))]
    MissingDates { path: PathBuf, dates: Vec<String> },

    #[error("insufficient overlap for {what}: need {required} years, have {available}")]
    InsufficientOverlap {
        what: &'static str,
        required: usize,
        available: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

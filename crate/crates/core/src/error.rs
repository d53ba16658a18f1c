//! Crate-wide error type.

use chrono::{DateTime, Utc};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input; positions are 1-based (column counts fields,
    /// not characters).
    #[error("parse error at line {line}, field {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A value fell outside its documented domain.
    #[error("value out of range: {0}")]
    Range(String),

    /// Inconsistent or invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Undecodable or unsupported raster data.
    #[error("raster format error: {0}")]
    Format(String),

    /// The ROI mask classifies every pixel the same way, so it cannot
    /// discriminate inside from outside.
    #[error("degenerate ROI mask: {0}")]
    DegenerateMask(String),

    /// An argument referenced something that does not exist (unknown spot,
    /// mismatched shapes, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few samples to compute the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// `now` precedes the last recorded update.
    #[error("clock skew: now {now} precedes last update {last_update}")]
    ClockSkew {
        now: DateTime<Utc>,
        last_update: DateTime<Utc>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error stems from configuration rather than data.
    /// The CLI maps config errors to exit code 2 and everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

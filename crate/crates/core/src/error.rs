use alloc::string::String;
use core::fmt;

use crate::labels::Label;

/// Errors from post validation and corpus construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    EmptyText,
    Probability { field: &'static str, value: f64 },
    FilterThreshold(f64),
    ZeroSampleSize,
    /// No row passed the posterior filter.
    EmptyPool { group: &'static str, threshold: f64 },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::EmptyText => f.write_str("post text is empty after trimming"),
            CorpusError::Probability { field, value } => {
                write!(f, "{field} = {value} is not a probability in [0, 1]")
            }
            CorpusError::FilterThreshold(t) => {
                write!(f, "filter threshold {t} must lie in the open interval (0.5, 1.0)")
            }
            CorpusError::ZeroSampleSize => f.write_str("sample size must be at least 1"),
            CorpusError::EmptyPool { group, threshold } => write!(
                f,
                "zero qualifying rows: no {group} row has a posterior >= {threshold}"
            ),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Errors raised while scoring text.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreError {
    EmptyText,
    /// A backend produced a value outside `[0, 1]`.
    OutOfRange { label: Label, value: f64 },
    /// Failure inside the model backend (corrupt weights, shape mismatch, ...).
    Backend(String),
    /// A batch item failed; `index` is its position in the input.
    Batch { index: usize, source: alloc::boxed::Box<ScoreError> },
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::EmptyText => f.write_str("text is empty after trimming"),
            ScoreError::OutOfRange { label, value } => {
                write!(f, "score for {label} is {value}, outside [0, 1]")
            }
            ScoreError::Backend(detail) => write!(f, "model backend failure: {detail}"),
            ScoreError::Batch { index, source } => write!(f, "batch item {index}: {source}"),
        }
    }
}

impl core::error::Error for ScoreError {}

/// Errors from the statistics in [`crate::metrics`].
#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    EmptyInput(&'static str),
    NotAProbability { what: &'static str, value: f64 },
    ZeroBins,
    GroupMismatch { expected: &'static str, found: &'static str },
    /// Threshold grid is not strictly increasing inside `[0, 1]`.
    Grid(&'static str),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyInput(what) => write!(f, "{what} requires at least one value"),
            MetricsError::NotAProbability { what, value } => {
                write!(f, "{what} value {value} is not a probability in [0, 1]")
            }
            MetricsError::ZeroBins => f.write_str("histogram needs at least one bin"),
            MetricsError::GroupMismatch { expected, found } => {
                write!(f, "expected {expected} group means, got {found}")
            }
            MetricsError::Grid(msg) => write!(f, "invalid threshold grid: {msg}"),
        }
    }
}

impl core::error::Error for MetricsError {}

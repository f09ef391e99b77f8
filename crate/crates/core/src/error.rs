use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GerberError>;

/// Everything that can go wrong between reading a returns file and
/// producing a statistic.
///
/// Rows and columns in ingest errors are 1-based file coordinates
/// (the header line, when present, is row 1).
#[derive(Debug, Error)]
pub enum GerberError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}:{row}:{column}: cell {value:?} is not a number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}:{row}:{column}: cell {value:?} is not finite")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}:{row}: expected {expected} fields, found {found}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate asset label {label:?}")]
    DuplicateLabel { label: String },

    #[error("T < 2: need at least two periods, found {periods}")]
    TooFewPeriods { periods: usize },

    #[error("need at least one asset column")]
    NoAssets,

    #[error("entry ({row}, {column}) is not finite")]
    NonFiniteValue { row: usize, column: usize },

    #[error("expected {expected} labels, found {found}")]
    LabelCount { expected: usize, found: usize },

    #[error("zero-variance column(s): {}", labels.join(", "))]
    ZeroVariance { labels: Vec<String> },

    #[error("threshold fraction c must be positive and finite, got {c}")]
    InvalidFraction { c: f64 },

    #[error("standard deviation at index {index} must be positive and finite, got {value}")]
    InvalidSigma { index: usize, value: f64 },

    #[error("tolerance must be positive and finite, got {tolerance}")]
    InvalidTolerance { tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("asset index {index} out of range for {len} assets")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("asset(s) never pierce their threshold: {}", labels.join(", "))]
    NeverPierces { labels: Vec<String> },

    #[error("pair(s) with every period jointly neutral: {}", pairs.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(", "))]
    AllNeutralPairs { pairs: Vec<(String, String)> },

    #[error("neutral fraction x[{row}][{column}] = {value} is not below 1")]
    NeutralFractionTooLarge {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("matrix is not symmetric: |m[{row}][{column}] - m[{column}][{row}]| = {difference:e}")]
    Asymmetric {
        row: usize,
        column: usize,
        difference: f64,
    },

    #[error("matrix forms disagree by {difference:e} (limit {limit:e})")]
    FormMismatch { difference: f64, limit: f64 },

    #[error("series did not reach tolerance {tolerance:e} within {terms} terms")]
    SeriesDidNotConverge { tolerance: f64, terms: usize },

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl GerberError {
    /// True for failures of a statistic's own precondition, as opposed to
    /// malformed input data.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            GerberError::NeverPierces { .. }
                | GerberError::AllNeutralPairs { .. }
                | GerberError::NeutralFractionTooLarge { .. }
        )
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite sample at index {index}")]
    NonFiniteInput { index: usize },

    #[error("series has {len} samples, need at least {min}")]
    LengthTooShort { len: usize, min: usize },

    #[error("sample interval must be finite and positive, got {0}")]
    InvalidSampleInterval(f64),

    #[error("transform length {0} is too small for a bispectrum (need N >= 8)")]
    DomainTooSmall(usize),

    #[error("segment length {segment_length} exceeds series length {series_length}")]
    SegmentTooLong {
        segment_length: usize,
        series_length: usize,
    },

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("frequency {omega} rad/sample is at or above Nyquist (pi)")]
    FrequencyAboveNyquist { omega: f64 },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("value {0} is outside the Box-Muller domain (0, 1]")]
    DomainError(f64),

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("solution blew up at step {step} (max |u| = {max_abs})")]
    BlowUp { step: u64, max_abs: f64 },

    #[error("CFL condition violated at step {step}: courant number {courant:.3} >= 1")]
    CflViolation { step: u64, courant: f64 },

    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("column `{0}` missing from CSV header")]
    SchemaMismatch(String),

    #[error("no valid rows in {0}")]
    NoValidRows(PathBuf),

    #[error("need at least 2 records to build a series, got {0}")]
    TooShort(usize),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::CflViolation { .. })
    }
}

//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("too few records: need at least {needed}, have {have}")]
    TooFewRecords { needed: usize, have: usize },

    #[error("success rate is constant across the dataset; every correlation is undefined")]
    AllUndefined,

    #[error("correlation weights undefined for sites {0:?}")]
    UndefinedWeights(Vec<usize>),

    #[error("correlation weights sum to zero in absolute value; cannot normalize")]
    ZeroNormalizer,

    #[error("degenerate anchors: p0 == p92 == {0}")]
    DegenerateAnchors(f64),

    #[error("validation set is empty")]
    EmptyValidation,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("k = {k} out of range 0..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("layout has {n} sites; exhaustive enumeration is capped at {max}")]
    LayoutTooLarge { n: usize, max: usize },

    #[error("noise sweep needs at least one level")]
    EmptyLevels,

    #[error("ground truth is zero for {0}; relative error undefined")]
    ZeroGroundTruth(String),

    #[error("invalid setting: {0}")]
    InvalidSetting(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }

    /// Stable process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 10,
            Error::Parse(_) => 11,
            Error::Invariant(_) => 12,
            Error::DimensionMismatch { .. } => 13,
            Error::Range(_) => 14,
            Error::TooFewRecords { .. } => 15,
            Error::AllUndefined => 16,
            Error::UndefinedWeights(_) => 17,
            Error::ZeroNormalizer => 18,
            Error::DegenerateAnchors(_) => 19,
            Error::EmptyValidation => 20,
            Error::EmptyDataset => 21,
            Error::Divergence { .. } => 22,
            Error::KOutOfRange { .. } => 23,
            Error::LayoutTooLarge { .. } => 24,
            Error::EmptyLevels => 25,
            Error::ZeroGroundTruth(_) => 26,
            Error::InvalidSetting(_) => 27,
        }
    }
}

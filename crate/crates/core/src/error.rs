use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode surfaced by the library.
///
/// The `Display` strings start with a stable kebab-case code so that callers
/// (and the CLI's exit-code mapping) can match on them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty-dataset: an empirical loss needs at least one data point")]
    EmptyDataset,
    #[error("bad-subsample-size: requested {requested} of {available} points")]
    BadSubsampleSize { requested: usize, available: usize },
    #[error("dim-mismatch: expected width {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("boundary-point: finite differences need a strictly interior point")]
    BoundaryPoint,
    #[error("diverged-gradient: non-finite gradient at step {step}")]
    DivergedGradient { step: usize },
    #[error("envelope-too-loose: expected acceptance rate {rate:e} is below 1e-6; use importance resampling instead")]
    EnvelopeTooLoose { rate: f64 },
    #[error(
        "weight-underflow: no finite importance weight (objective is non-finite on every proposal)"
    )]
    WeightUnderflow,
    #[error("all-candidates-diverged: the inner optimizer diverged from all {count} samples")]
    AllCandidatesDiverged { count: usize },
    #[error("bad-theory-params: {0}")]
    BadTheoryParams(String),
    #[error("region-exceeds-domain: a ball of radius {radius} covers the whole domain")]
    RegionExceedsDomain { radius: f64 },
    #[error("no-data: cannot build a histogram from zero values")]
    NoData,
    #[error("utility-overflow: scaled utility is not finite for customer {customer}, draw {draw}")]
    UtilityOverflow { customer: usize, draw: usize },
    #[error("experiment-unstable: {failed} of {total} replications failed")]
    ExperimentUnstable { failed: usize, total: usize },
    #[error("invalid-config: {0}")]
    InvalidConfig(String),
    #[error("format: {0}")]
    Format(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable code, i.e. the part of the message before the colon.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyDataset => "empty-dataset",
            Error::BadSubsampleSize { .. } => "bad-subsample-size",
            Error::DimMismatch { .. } => "dim-mismatch",
            Error::BoundaryPoint => "boundary-point",
            Error::DivergedGradient { .. } => "diverged-gradient",
            Error::EnvelopeTooLoose { .. } => "envelope-too-loose",
            Error::WeightUnderflow => "weight-underflow",
            Error::AllCandidatesDiverged { .. } => "all-candidates-diverged",
            Error::BadTheoryParams(_) => "bad-theory-params",
            Error::RegionExceedsDomain { .. } => "region-exceeds-domain",
            Error::NoData => "no-data",
            Error::UtilityOverflow { .. } => "utility-overflow",
            Error::ExperimentUnstable { .. } => "experiment-unstable",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Format(_) => "format",
            Error::Io { .. } => "io",
        }
    }
}

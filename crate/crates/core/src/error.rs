use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no parseable samples to vote on")]
    NoValidSamples,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("AUC is undefined when only one class is present")]
    UndefinedAuc,
    #[error("invalid cluster count {k} for {labels} labels")]
    InvalidK { k: usize, labels: usize },
    #[error("affinity matrix has no positive weight")]
    DegenerateAffinity,
    #[error("silhouette is undefined for a single cluster")]
    UndefinedSilhouette,
    #[error("invalid synonym dictionary: {0}")]
    InvalidDictionary(String),
    #[error("predictions do not match instances: {0}")]
    InputMismatch(String),
    #[error("unsupported report format `{0}`")]
    UnsupportedFormat(String),
    #[error("invalid thresholds: need 0 <= low < high <= 1, got ({low}, {high})")]
    InvalidThresholds { low: f64, high: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("zero bandwidth: all sampled feature rows coincide")]
    ZeroBandwidth,

    #[error("kernel matrix not PD")]
    NotPositiveDefinite,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("empty test set")]
    EmptyTestSet,

    #[error("single class: at least two classes are required")]
    SingleClass,

    #[error("no external predictions available for {0} labels")]
    MissingPredictions(usize),
}

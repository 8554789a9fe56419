use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Run(#[from] alsim_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for dataset
    /// problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use alsim_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Dataset(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Run(e) => match e {
                E::InvalidConfig(_) => 2,
                E::DegenerateDataset(_) | E::ZeroBandwidth | E::SingleClass | E::EmptyTestSet | E::EmptyTrainingSet => 3,
                E::NotPositiveDefinite | E::MissingPredictions(_) => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

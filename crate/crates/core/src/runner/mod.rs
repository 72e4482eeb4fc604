//! Execution: layered configuration, deterministic splits, the retrieval
//! baseline, experiment orchestration, and hyper-parameter search.

pub mod baseline;
pub mod config;
pub mod experiment;
pub mod search;
pub mod split;

pub use baseline::{BaselineModel, BaselineParams, Weighting};
pub use config::{resolve_config, Config, ConfigError, ConfigValue, Layer};
pub use experiment::{
    prepare_experiment, run_experiment, run_id, write_experiment, ExperimentResult, Prepared,
    DATA_DIR_ENV,
};
pub use search::{hyperparam_search, CandidateResult, SearchOutcome};
pub use split::{make_splits, shuffled_indices, SplitError, SplitMix64, SplitMode, SplitPlan};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] crate::dataio::DataError),
    #[error(transparent)]
    Preprocess(#[from] crate::preprocess::PreprocessError),
    #[error(transparent)]
    Eval(#[from] crate::evaluation::EvalError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("no dataset configured; set data.path")]
    MissingDataset,
    #[error("unknown model '{0}'; this build ships the 'retrieval' baseline")]
    UnknownModel(String),
    #[error("empty search space: {0}")]
    EmptySearchSpace(String),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<RunnerError>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

//! Training, evaluation metrics and result files.

mod config;
mod metrics;
mod report;
mod trainer;

use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::model::{ConfigError, ModelError};

pub use config::{Regime, Scheduler, TrainConfig};
pub use metrics::{edit_distance_total, levenshtein, mean_std, morpheme_f1, morphemes, whole_word_accuracy, F1Mode, MeanStd, MetricsError, Prf};
pub use report::{aggregate_runs, format_metrics, parse_metrics, read_predictions, write_predictions, Aggregate, RunResult};
pub use trainer::{evaluate, make_batches, predict, train, EpochRecord, Evaluation, TrainOutcome};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("empty training set")]
    EmptyTrainSet,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },
}

impl From<AutodiffError> for TrainError {
    fn from(e: AutodiffError) -> Self {
        TrainError::Model(e.into())
    }
}

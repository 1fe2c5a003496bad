//! Character-level encoder-decoder segmenters: an attentive LSTM and a
//! pointer-generator LSTM, each able to take a translation vector through
//! any of the incorporation strategies.

mod batch;
mod config;
mod network;

use thiserror::Error;

use crate::autodiff::AutodiffError;
use crate::trans_repr::TransReprError;

pub use batch::{Batch, TranslationData};
pub use config::{translation_width, Arch, ConfigError, ModelConfig, Strategy};
pub use network::{DecoderStep, EncoderOutput, Intervention, SegModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no translation data for sentence {0:?}")]
    MissingTranslation(String),
    #[error("no alignment for sentence {0:?}")]
    MissingAlignment(String),
    #[error("translation width {found} does not match model width {expected}")]
    DimError { expected: usize, found: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    TransRepr(#[from] TransReprError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

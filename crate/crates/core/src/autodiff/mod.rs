//! Dense reverse-mode differentiation, plus the optimizers and learning
//! rate schedules used for training.

mod checkpoint;
mod graph;
mod lstm;
mod optim;
mod params;
mod tensor;

use thiserror::Error;

pub use checkpoint::{config_hash, read_checkpoint, write_checkpoint, Checkpoint};
pub use graph::{Axis, Gradients, Graph, Var};
pub use lstm::{lstm_cell, LstmWeights};
pub use optim::{adam_step, clip_grad_norm, plateau_step, AdamState, PlateauScheduler, WarmupInvSqrt};
pub use params::{ParamId, ParamStore, Parameter};
pub use tensor::{Real, Tensor};

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("backward needs a 1x1 loss, got {0:?}")]
    NotScalar((usize, usize)),
    #[error("{len} values cannot fill shape {shape:?}")]
    BadData { shape: (usize, usize), len: usize },
    #[error("index {index} out of range for {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{0}: no inputs")]
    Empty(&'static str),
    #[error("duplicate parameter name {0:?}")]
    DuplicateParam(String),
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

//! Character-level canonical morphological segmentation, optionally
//! conditioned on pretrained-model representations of a sentence's
//! translation.

pub mod alignment;
pub mod autodiff;
pub mod corpus;
pub mod experiment;
pub mod model;
pub mod trans_repr;
pub mod train;

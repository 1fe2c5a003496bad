//! IGT ingestion and the word-level preprocessing pipeline.
//!
//! Raw blocks are parsed, pretokenized and NFD-normalized, then filtered to
//! sentences whose transcription and canonical tiers line up word for word.
//! Unique (surface, canonical) pairs become [`SegmentationInstance`]s, which
//! are split and subsampled with explicit seeds.

mod igt;
mod instances;
mod pretokenize;
mod vocab;

use thiserror::Error;

pub use igt::{parse_igt, prepare_sentence, sentence_id, validate, IgtSchema, IgtSentence};
pub use instances::{extract_instances, read_instances, split, subsample, write_instances, SegmentationInstance, Splits};
pub use pretokenize::{is_punctuation, normalize_nfd, pretokenize, LanguageRules};
pub use vocab::{build_vocab, Vocabulary, BOS, EOS, PAD, REPLACEMENT, RESERVED, UNK};

/// Default morpheme separators found in the canonical tier.
pub const DEFAULT_SEPARATORS: [char; 2] = ['-', '='];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("block {block}: missing {marker} line")]
    MissingLine { block: usize, marker: String },
    #[error("block {block}: unexpected line {line:?}")]
    MalformedBlock { block: usize, line: String },
    #[error("split ratios ({0}, {1}, {2}) must be nonnegative and sum to 1")]
    BadRatios(f64, f64, f64),
    #[error("requested {requested} instances but only {available} are available")]
    TooFew { requested: usize, available: usize },
    #[error("cannot build a vocabulary from an empty training set")]
    EmptyTrainSet,
    #[error("malformed instance record {0:?}")]
    BadRecord(String),
}

/// Output of [`preprocess`].
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub sentences: Vec<IgtSentence>,
    pub instances: Vec<SegmentationInstance>,
    pub splits: Splits,
}

/// Full pipeline: parse, pretokenize, normalize, validate, extract, split.
///
/// Sentence ids are assigned before validation, so they keep pointing at
/// the original block (and alignment line) even when blocks are dropped.
pub fn preprocess(text: &str, schema: &IgtSchema, rules: &LanguageRules, seed: u64) -> Result<Preprocessed, CorpusError> {
    let parsed = parse_igt(text, schema)?;
    let prepared = parsed
        .iter()
        .map(|s| prepare_sentence(s, rules, &DEFAULT_SEPARATORS))
        .collect();
    let sentences = validate(prepared);
    let instances = extract_instances(&sentences, seed);
    let splits = split(&instances, (0.6, 0.2, 0.2), seed)?;
    Ok(Preprocessed {
        sentences,
        instances,
        splits,
    })
}

use std::collections::HashMap;

use crate::alignment::SentenceAlignment;
use crate::corpus::{BOS, EOS, PAD};
use crate::trans_repr::{pool, ClsStrategy, EmbeddingTable, PooledTranslation};

use super::ModelError;

/// Translation embeddings and word alignments, keyed by sentence id.
#[derive(Debug, Clone, Default)]
pub struct TranslationData {
    pub embeddings: EmbeddingTable,
    pub alignments: HashMap<String, SentenceAlignment>,
}

impl TranslationData {
    pub fn new(embeddings: EmbeddingTable, alignments: impl IntoIterator<Item = SentenceAlignment>) -> Self {
        Self {
            embeddings,
            alignments: alignments.into_iter().map(|a| (a.sentence_id.clone(), a)).collect(),
        }
    }

    /// Pooled translation inputs for one source word.
    pub fn pooled(&self, sentence_id: &str, word_index: usize, cls: ClsStrategy) -> Result<PooledTranslation, ModelError> {
        let e = self
            .embeddings
            .get(sentence_id)
            .ok_or_else(|| ModelError::MissingTranslation(sentence_id.to_owned()))?;
        let aligned = if cls.uses_alignment() {
            self.alignments
                .get(sentence_id)
                .ok_or_else(|| ModelError::MissingAlignment(sentence_id.to_owned()))?
                .aligned_indices(word_index)
        } else {
            Vec::new()
        };
        Ok(pool(e, &aligned, cls)?)
    }
}

/// Padded, position-major model input.
///
/// Sequence arrays are laid out as `position * size + row`, so each
/// timestep is a contiguous block of `size` rows.
#[derive(Debug, Clone)]
pub struct Batch {
    pub size: usize,
    pub src_len: Vec<usize>,
    pub src_steps: usize,
    pub src_ids: Vec<usize>,
    /// Target-vocabulary id of each source position, row-major `size x src_steps`.
    pub copy_ids: Vec<Vec<usize>>,
    pub tgt_steps: usize,
    pub tgt_in: Vec<usize>,
    pub tgt_out: Vec<usize>,
    pub tgt_mask: Vec<bool>,
    pub translations: Option<Vec<PooledTranslation>>,
    pub max_len: Vec<usize>,
}

impl Batch {
    /// `sources[b]` and `copies[b]` must have equal lengths. Targets are
    /// given without BOS/EOS.
    pub fn new(
        sources: &[Vec<usize>],
        copies: &[Vec<usize>],
        targets: Option<&[Vec<usize>]>,
        translations: Option<Vec<PooledTranslation>>,
        max_len: Vec<usize>,
    ) -> Result<Self, ModelError> {
        let size = sources.len();
        if size == 0 || sources.iter().any(|s| s.is_empty()) {
            return Err(ModelError::EmptyBatch);
        }
        let src_len: Vec<usize> = sources.iter().map(Vec::len).collect();
        let src_steps = *src_len.iter().max().unwrap();
        let mut src_ids = vec![PAD; src_steps * size];
        for (b, s) in sources.iter().enumerate() {
            for (t, &id) in s.iter().enumerate() {
                src_ids[t * size + b] = id;
            }
        }
        let copy_ids = copies
            .iter()
            .map(|c| {
                let mut row = c.clone();
                row.resize(src_steps, PAD);
                row
            })
            .collect();
        let (mut tgt_steps, mut tgt_in, mut tgt_out, mut tgt_mask) = (0, vec![], vec![], vec![]);
        if let Some(targets) = targets {
            tgt_steps = targets.iter().map(|t| t.len() + 1).max().unwrap_or(1);
            tgt_in = vec![PAD; tgt_steps * size];
            tgt_out = vec![PAD; tgt_steps * size];
            tgt_mask = vec![false; tgt_steps * size];
            for (b, y) in targets.iter().enumerate() {
                for t in 0..=y.len() {
                    tgt_in[t * size + b] = if t == 0 { BOS } else { y[t - 1] };
                    tgt_out[t * size + b] = if t == y.len() { EOS } else { y[t] };
                    tgt_mask[t * size + b] = true;
                }
            }
        }
        Ok(Self {
            size,
            src_len,
            src_steps,
            src_ids,
            copy_ids,
            tgt_steps,
            tgt_in,
            tgt_out,
            tgt_mask,
            translations,
            max_len,
        })
    }

    pub fn has_targets(&self) -> bool {
        self.tgt_steps > 0
    }
}

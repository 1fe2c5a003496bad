//! Word alignments in Pharaoh `i-j` format and their evaluation.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::corpus::sentence_id;

#[derive(Debug, Error)]
pub enum AlignmentError {
    #[error("malformed alignment token {0:?}")]
    Malformed(String),
    #[error("sentence ids differ: predicted {pred:?}, gold {gold:?}")]
    IdMismatch { pred: String, gold: String },
    #[error("predicted file has {pred} sentences, gold has {gold}")]
    CountMismatch { pred: usize, gold: usize },
}

/// Link from transcription word `src` to translation word `tgt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlignmentLink {
    pub src: usize,
    pub tgt: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SentenceAlignment {
    pub sentence_id: String,
    pub links: BTreeSet<AlignmentLink>,
}

impl SentenceAlignment {
    pub fn new(sentence_id: impl Into<String>, links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            links: links.into_iter().map(|(src, tgt)| AlignmentLink { src, tgt }).collect(),
        }
    }

    /// Sorted, deduplicated translation indices linked to `word_index`.
    pub fn aligned_indices(&self, word_index: usize) -> Vec<usize> {
        let lo = AlignmentLink { src: word_index, tgt: 0 };
        let hi = AlignmentLink {
            src: word_index,
            tgt: usize::MAX,
        };
        self.links.range(lo..=hi).map(|l| l.tgt).collect()
    }

    pub fn to_pharaoh(&self) -> String {
        self.links.iter().map(|l| format!("{}-{}", l.src, l.tgt)).collect::<Vec<_>>().join(" ")
    }
}

pub fn aligned_indices(word_index: usize, alignment: &SentenceAlignment) -> Vec<usize> {
    alignment.aligned_indices(word_index)
}

/// Parses one line of whitespace-separated `i-j` pairs. The id is left
/// empty; see [`parse_pharaoh_file`].
pub fn parse_pharaoh(line: &str) -> Result<SentenceAlignment, AlignmentError> {
    let mut links = BTreeSet::new();
    for token in line.split_whitespace() {
        let malformed = || AlignmentError::Malformed(token.to_owned());
        let (s, t) = token.split_once('-').ok_or_else(malformed)?;
        let parse = |x: &str| -> Result<usize, AlignmentError> {
            if x.is_empty() || !x.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            x.parse().map_err(|_| malformed())
        };
        links.insert(AlignmentLink {
            src: parse(s)?,
            tgt: parse(t)?,
        });
    }
    Ok(SentenceAlignment {
        sentence_id: String::new(),
        links,
    })
}

/// One line per IGT block, in file order; line `k` gets the id of block `k`.
pub fn parse_pharaoh_file(text: &str) -> Result<Vec<SentenceAlignment>, AlignmentError> {
    let mut lines: Vec<&str> = text.split('\n').map(|l| l.trim_end_matches('\r')).collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    lines
        .into_iter()
        .enumerate()
        .map(|(k, line)| {
            let mut a = parse_pharaoh(line)?;
            a.sentence_id = sentence_id(k);
            Ok(a)
        })
        .collect()
}

pub fn write_pharaoh_file(alignments: &[SentenceAlignment]) -> String {
    alignments.iter().map(|a| a.to_pharaoh() + "\n").collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl AlignmentScore {
    /// Harmonic mean; zero when both inputs are zero.
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

/// Link-level precision/recall/F1 pooled over all sentences.
pub fn evaluate_alignment(pred: &[SentenceAlignment], gold: &[SentenceAlignment]) -> Result<AlignmentScore, AlignmentError> {
    if pred.len() != gold.len() {
        return Err(AlignmentError::CountMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let (mut hits, mut n_pred, mut n_gold) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        if p.sentence_id != g.sentence_id {
            return Err(AlignmentError::IdMismatch {
                pred: p.sentence_id.clone(),
                gold: g.sentence_id.clone(),
            });
        }
        hits += p.links.intersection(&g.links).count();
        n_pred += p.links.len();
        n_gold += g.links.len();
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(AlignmentScore::from_pr(ratio(hits, n_pred), ratio(hits, n_gold)))
}

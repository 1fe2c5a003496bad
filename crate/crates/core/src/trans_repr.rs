//! Translation embeddings (TransEmb-v1 files) and the fixed-length
//! translation vector built from them.
//!
//! Each record holds a sentence-level vector `cls` and one pooled vector per
//! translation word. A [`ClsStrategy`] decides how the words aligned to a
//! source word and the sentence vector are pooled before projection to the
//! model's embedding width.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::autodiff::Tensor;

#[derive(Debug, Error)]
pub enum TransReprError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sentence {id:?}: expected dimension {expected}, found {found}")]
    DimMismatch { id: String, expected: usize, found: usize },
    #[error("duplicate sentence id {0:?}")]
    DuplicateSentenceId(String),
    #[error("aligned index {index} out of bounds for {len} translation words")]
    IndexOutOfBounds { index: usize, len: usize },
    #[error("CLS-Concat needs an even output width, got {0}")]
    OddWidth(usize),
    #[error("{0} takes no separate CLS weight")]
    UnexpectedClsWeight(ClsStrategy),
    #[error("unknown CLS strategy {0:?}")]
    UnknownStrategy(String),
}

/// How the sentence vector `d0` enters the translation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClsStrategy {
    /// Average of aligned words only.
    None,
    /// Average of `d0` together with the aligned words.
    Avg,
    /// Projected word average concatenated with projected `d0`.
    Concat,
    /// `d0` alone; alignments are ignored.
    Only,
}

impl ClsStrategy {
    pub const ALL: [ClsStrategy; 4] = [ClsStrategy::None, ClsStrategy::Avg, ClsStrategy::Concat, ClsStrategy::Only];

    pub fn uses_alignment(self) -> bool {
        self != ClsStrategy::Only
    }

    pub fn name(self) -> &'static str {
        match self {
            ClsStrategy::None => "CLS-None",
            ClsStrategy::Avg => "CLS-Avg",
            ClsStrategy::Concat => "CLS-Concat",
            ClsStrategy::Only => "CLS-Only",
        }
    }
}

impl fmt::Display for ClsStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClsStrategy {
    type Err = TransReprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cls-none" | "none" => Ok(ClsStrategy::None),
            "cls-avg" | "avg" => Ok(ClsStrategy::Avg),
            "cls-concat" | "concat" => Ok(ClsStrategy::Concat),
            "cls-only" | "only" => Ok(ClsStrategy::Only),
            _ => Err(TransReprError::UnknownStrategy(s.to_owned())),
        }
    }
}

/// Pretrained-model vectors for one translated sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationEmbeddings {
    pub sentence_id: String,
    pub dim: usize,
    pub cls: Vec<f64>,
    pub words: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct Record {
    id: String,
    dim: usize,
    cls: Vec<f64>,
    words: Vec<Vec<f64>>,
}

pub type EmbeddingTable = HashMap<String, TranslationEmbeddings>;

/// Parses a TransEmb-v1 file. All records must share one dimension.
pub fn load_embeddings(text: &str) -> Result<EmbeddingTable, TransReprError> {
    let mut table = HashMap::new();
    let mut dim: Option<usize> = None;
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| TransReprError::Parse {
            line: k + 1,
            msg: e.to_string(),
        })?;
        let expected = *dim.get_or_insert(rec.dim);
        let mismatch = |found| TransReprError::DimMismatch {
            id: rec.id.clone(),
            expected,
            found,
        };
        if rec.dim != expected {
            return Err(mismatch(rec.dim));
        }
        if rec.cls.len() != expected {
            return Err(mismatch(rec.cls.len()));
        }
        if let Some(w) = rec.words.iter().find(|w| w.len() != expected) {
            return Err(mismatch(w.len()));
        }
        if table.contains_key(&rec.id) {
            return Err(TransReprError::DuplicateSentenceId(rec.id));
        }
        table.insert(
            rec.id.clone(),
            TranslationEmbeddings {
                sentence_id: rec.id,
                dim: rec.dim,
                cls: rec.cls,
                words: rec.words,
            },
        );
    }
    Ok(table)
}

fn push_floats(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // 9 significant digits round-trips any f32
        out.push_str(&format!("{x:.8e}"));
    }
    out.push(']');
}

/// Serializes records in the given order.
pub fn write_embeddings<'a>(records: impl IntoIterator<Item = &'a TranslationEmbeddings>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!("{{\"id\": {}, \"dim\": {}, \"cls\": ", serde_json::Value::from(r.sentence_id.as_str()), r.dim));
        push_floats(&mut out, &r.cls);
        out.push_str(", \"words\": [");
        for (i, w) in r.words.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            push_floats(&mut out, w);
        }
        out.push_str("]}\n");
    }
    out
}

/// Inputs to the projection, before any trainable weight is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledTranslation {
    /// Multiplied by `W_trans`.
    pub primary: Vec<f64>,
    /// Multiplied by `W_cls`; present only under [`ClsStrategy::Concat`].
    pub cls: Option<Vec<f64>>,
}

fn mean<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Pools the aligned word vectors and `d0` according to `strategy`.
/// An empty alignment makes the word average the zero vector.
pub fn pool(e: &TranslationEmbeddings, aligned: &[usize], strategy: ClsStrategy) -> Result<PooledTranslation, TransReprError> {
    if strategy.uses_alignment() {
        if let Some(&bad) = aligned.iter().find(|&&i| i >= e.words.len()) {
            return Err(TransReprError::IndexOutOfBounds {
                index: bad,
                len: e.words.len(),
            });
        }
    }
    let words = || aligned.iter().map(|&i| e.words[i].as_slice());
    Ok(match strategy {
        ClsStrategy::None => PooledTranslation {
            primary: mean(e.dim, words()),
            cls: None,
        },
        ClsStrategy::Avg => PooledTranslation {
            primary: mean(e.dim, std::iter::once(e.cls.as_slice()).chain(words())),
            cls: None,
        },
        ClsStrategy::Concat => PooledTranslation {
            primary: mean(e.dim, words()),
            cls: Some(e.cls.clone()),
        },
        ClsStrategy::Only => PooledTranslation {
            primary: e.cls.clone(),
            cls: None,
        },
    })
}

/// Projection from the pretrained model's width to a translation vector of
/// width `out_dim`. Under CLS-Concat each half of the output comes from a
/// separate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationProjector {
    pub strategy: ClsStrategy,
    pub out_dim: usize,
    pub w_trans: Tensor<f64>,
    pub w_cls: Option<Tensor<f64>>,
}

/// `(rows, cols)` of `W_trans`, and of `W_cls` when present.
pub type ProjectorShapes = ((usize, usize), Option<(usize, usize)>);

impl TranslationProjector {
    /// Shapes of `(W_trans, W_cls)` for a projector into `out_dim`.
    pub fn shapes(strategy: ClsStrategy, h_plm: usize, out_dim: usize) -> Result<ProjectorShapes, TransReprError> {
        if strategy == ClsStrategy::Concat {
            if !out_dim.is_multiple_of(2) {
                return Err(TransReprError::OddWidth(out_dim));
            }
            Ok(((h_plm, out_dim / 2), Some((h_plm, out_dim / 2))))
        } else {
            Ok(((h_plm, out_dim), None))
        }
    }

    pub fn new(strategy: ClsStrategy, w_trans: Tensor<f64>, w_cls: Option<Tensor<f64>>) -> Result<Self, TransReprError> {
        let out_dim = match (strategy, &w_cls) {
            (ClsStrategy::Concat, Some(c)) if c.shape() == w_trans.shape() => 2 * w_trans.cols(),
            (ClsStrategy::Concat, _) => return Err(TransReprError::OddWidth(w_trans.cols())),
            (_, None) => w_trans.cols(),
            (s, Some(_)) => return Err(TransReprError::UnexpectedClsWeight(s)),
        };
        Ok(Self {
            strategy,
            out_dim,
            w_trans,
            w_cls,
        })
    }

    /// Uniform initialization in `[-bound, bound]`.
    pub fn random(strategy: ClsStrategy, h_plm: usize, out_dim: usize, bound: f64, rng: &mut impl Rng) -> Result<Self, TransReprError> {
        let (wt, wc) = Self::shapes(strategy, h_plm, out_dim)?;
        let mut draw = |(r, c): (usize, usize)| {
            let data = (0..r * c).map(|_| rng.random_range(-bound..=bound)).collect();
            Tensor::from_vec(r, c, data).expect("shape")
        };
        let w_trans = draw(wt);
        let w_cls = wc.map(&mut draw);
        Self::new(strategy, w_trans, w_cls)
    }

    pub fn represent(&self, e: &TranslationEmbeddings, aligned: &[usize]) -> Result<Vec<f64>, TransReprError> {
        if e.dim != self.w_trans.rows() {
            return Err(TransReprError::DimMismatch {
                id: e.sentence_id.clone(),
                expected: self.w_trans.rows(),
                found: e.dim,
            });
        }
        let pooled = pool(e, aligned, self.strategy)?;
        let mut v = project(&pooled.primary, &self.w_trans);
        if let (Some(cls), Some(w)) = (&pooled.cls, &self.w_cls) {
            v.extend(project(cls, w));
        }
        Ok(v)
    }
}

fn project(x: &[f64], w: &Tensor<f64>) -> Vec<f64> {
    let mut out = vec![0.0; w.cols()];
    for (k, &xk) in x.iter().enumerate() {
        out.iter_mut().zip(w.row(k)).for_each(|(o, &wk)| *o += xk * wk);
    }
    out
}

/// Convenience form of [`TranslationProjector::represent`].
pub fn represent(e: &TranslationEmbeddings, aligned: &[usize], p: &TranslationProjector) -> Result<Vec<f64>, TransReprError> {
    p.represent(e, aligned)
}

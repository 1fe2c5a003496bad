use std::collections::HashMap;

use thiserror::Error;

use crate::corpus::normalize_nfd;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{preds} predictions for {golds} gold items")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("no results to aggregate")]
    Empty,
}

fn same_len<A, B>(preds: &[A], golds: &[B]) -> Result<(), MetricsError> {
    if preds.len() == golds.len() {
        Ok(())
    } else {
        Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        })
    }
}

/// Fraction of exact matches after NFD normalization; 0 for empty input.
pub fn whole_word_accuracy<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<f64, MetricsError> {
    same_len(preds, golds)?;
    if preds.is_empty() {
        return Ok(0.0);
    }
    let hits = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| normalize_nfd(p.as_ref()) == normalize_nfd(g.as_ref()))
        .count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Unit-cost Levenshtein distance over NFD code points.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = normalize_nfd(a).chars().collect();
    let b: Vec<char> = normalize_nfd(b).chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn edit_distance_total<S: AsRef<str>>(preds: &[S], golds: &[S]) -> Result<usize, MetricsError> {
    same_len(preds, golds)?;
    Ok(preds.iter().zip(golds).map(|(p, g)| levenshtein(p.as_ref(), g.as_ref())).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum F1Mode {
    /// Morpheme counts pooled over the corpus.
    #[default]
    Micro,
    /// Per-word precision, recall and F1, averaged over words.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(overlap: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let (precision, recall) = (ratio(overlap, predicted), ratio(overlap, gold));
        Self {
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    }
}

pub(crate) fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Morphemes of a word: NFD, split on `separator`, empty pieces dropped.
pub fn morphemes(word: &str, separator: char) -> Vec<String> {
    normalize_nfd(word)
        .split(separator)
        .filter(|m| !m.is_empty())
        .map(str::to_owned)
        .collect()
}

fn overlap(pred: &[String], gold: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for m in gold {
        *counts.entry(m).or_default() += 1;
    }
    pred.iter()
        .filter(|m| match counts.get_mut(m.as_str()) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count()
}

pub fn morpheme_f1<S: AsRef<str>>(preds: &[S], golds: &[S], separator: char, mode: F1Mode) -> Result<Prf, MetricsError> {
    same_len(preds, golds)?;
    let pairs = preds
        .iter()
        .zip(golds)
        .map(|(p, g)| (morphemes(p.as_ref(), separator), morphemes(g.as_ref(), separator)));
    Ok(match mode {
        F1Mode::Micro => {
            let (mut o, mut np, mut ng) = (0, 0, 0);
            for (p, g) in pairs {
                o += overlap(&p, &g);
                np += p.len();
                ng += g.len();
            }
            Prf::from_counts(o, np, ng)
        }
        F1Mode::Macro => {
            if preds.is_empty() {
                return Ok(Prf::default());
            }
            let mut acc = Prf::default();
            for (p, g) in pairs {
                let s = Prf::from_counts(overlap(&p, &g), p.len(), g.len());
                acc.precision += s.precision;
                acc.recall += s.recall;
                acc.f1 += s.f1;
            }
            let n = preds.len() as f64;
            Prf {
                precision: acc.precision / n,
                recall: acc.recall / n,
                f1: acc.f1 / n,
            }
        }
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    /// Set when only one value was given; `std` is then 0.
    pub single: bool,
}

pub fn mean_std(values: &[f64]) -> Result<MeanStd, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok(MeanStd {
            mean,
            std: 0.0,
            single: true,
        });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanStd {
        mean,
        std: var.sqrt(),
        single: false,
    })
}

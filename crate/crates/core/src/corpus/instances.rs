use std::collections::HashMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, IgtSentence};

/// One (surface word, canonical segmentation) training pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentationInstance {
    pub surface: String,
    pub canonical: String,
    pub sentence_id: String,
    pub word_index: usize,
}

impl SegmentationInstance {
    pub fn new(surface: impl Into<String>, canonical: impl Into<String>, sentence_id: impl Into<String>, word_index: usize) -> Self {
        Self {
            surface: surface.into(),
            canonical: canonical.into(),
            sentence_id: sentence_id.into(),
            word_index,
        }
    }

    /// `surface<TAB>canonical<TAB>sentence_id<TAB>word_index`
    pub fn to_record(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.surface, self.canonical, self.sentence_id, self.word_index)
    }

    pub fn from_record(line: &str) -> Result<Self, CorpusError> {
        let bad = || CorpusError::BadRecord(line.to_owned());
        let mut fields = line.split('\t');
        let surface = fields.next().filter(|s| !s.is_empty()).ok_or_else(bad)?;
        let canonical = fields.next().filter(|s| !s.is_empty()).ok_or_else(bad)?;
        let sentence_id = fields.next().ok_or_else(bad)?;
        let word_index = fields.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if fields.next().is_some() {
            return Err(bad());
        }
        Ok(Self::new(surface, canonical, sentence_id, word_index))
    }
}

pub fn write_instances(instances: &[SegmentationInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&inst.to_record());
        out.push('\n');
    }
    out
}

pub fn read_instances(text: &str) -> Result<Vec<SegmentationInstance>, CorpusError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(SegmentationInstance::from_record)
        .collect()
}

/// Collects every unique (surface, canonical) pair from length-consistent
/// sentences. When a pair occurs more than once, one occurrence is chosen
/// uniformly at random. Output follows first-occurrence order.
pub fn extract_instances(sentences: &[IgtSentence], seed: u64) -> Vec<SegmentationInstance> {
    let mut order: Vec<(&str, &str)> = Vec::new();
    let mut occurrences: HashMap<(&str, &str), Vec<(&str, usize)>> = HashMap::new();
    for sentence in sentences.iter().filter(|s| s.is_aligned()) {
        for (i, (surface, canonical)) in sentence.transcription.iter().zip(&sentence.canonical).enumerate() {
            let key = (surface.as_str(), canonical.as_str());
            let slot = occurrences.entry(key).or_default();
            if slot.is_empty() {
                order.push(key);
            }
            slot.push((sentence.id.as_str(), i));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order
        .into_iter()
        .map(|key| {
            let occ = &occurrences[&key];
            let (sid, idx) = occ[rng.random_range(0..occ.len())];
            SegmentationInstance::new(key.0, key.1, sid, idx)
        })
        .collect()
}

/// Train/dev/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<SegmentationInstance>,
    pub dev: Vec<SegmentationInstance>,
    pub test: Vec<SegmentationInstance>,
}

/// Seeded random partition. Dev and test sizes are floored; train takes
/// the remainder. Each part keeps the input order.
pub fn split(instances: &[SegmentationInstance], ratios: (f64, f64, f64), seed: u64) -> Result<Splits, CorpusError> {
    let (tr, dv, te) = ratios;
    let sum = tr + dv + te;
    if (sum - 1.0).abs() > 1e-9 || tr < 0.0 || dv < 0.0 || te < 0.0 {
        return Err(CorpusError::BadRatios(tr, dv, te));
    }
    let n = instances.len();
    let n_dev = (n as f64 * dv).floor() as usize;
    let n_test = (n as f64 * te).floor() as usize;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut dev_idx = perm[..n_dev].to_vec();
    let mut test_idx = perm[n_dev..n_dev + n_test].to_vec();
    let mut train_idx = perm[n_dev + n_test..].to_vec();
    let pick = |idx: &mut Vec<usize>| {
        idx.sort_unstable();
        idx.iter().map(|&i| instances[i].clone()).collect::<Vec<_>>()
    };
    Ok(Splits {
        train: pick(&mut train_idx),
        dev: pick(&mut dev_idx),
        test: pick(&mut test_idx),
    })
}

/// Uniform random subset of size `n`, in input order.
pub fn subsample(train: &[SegmentationInstance], n: usize, seed: u64) -> Result<Vec<SegmentationInstance>, CorpusError> {
    if n > train.len() {
        return Err(CorpusError::TooFew {
            requested: n,
            available: train.len(),
        });
    }
    let mut idx = index::sample(&mut ChaCha8Rng::seed_from_u64(seed), train.len(), n).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| train[i].clone()).collect())
}

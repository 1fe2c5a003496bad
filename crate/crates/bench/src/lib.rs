//! Deterministic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeg::alignment::SentenceAlignment;
use transeg::corpus::{build_vocab, SegmentationInstance};
use transeg::model::{ModelConfig, SegModel, TranslationData};
use transeg::trans_repr::TranslationEmbeddings;

const LETTERS: &[u8] = b"ptkmnslaeiou";

fn word(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char).collect()
}

/// `n` stem-suffix pairs, one per sentence.
pub fn corpus(n: usize, seed: u64) -> Vec<SegmentationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = rng.random_range(3..8);
            let stem = word(&mut rng, len);
            let suffix = word(&mut rng, 2);
            SegmentationInstance::new(format!("{stem}{suffix}"), format!("{stem}-{suffix}"), format!("s{i}"), 0)
        })
        .collect()
}

/// Random `dim`-wide translation vectors for each instance's sentence.
pub fn translations(instances: &[SegmentationInstance], dim: usize, seed: u64) -> TranslationData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let table = instances
        .iter()
        .map(|i| {
            let e = TranslationEmbeddings {
                sentence_id: i.sentence_id.clone(),
                dim,
                cls: v(),
                words: vec![v(), v()],
            };
            (i.sentence_id.clone(), e)
        })
        .collect();
    let aligns = instances.iter().map(|i| SentenceAlignment::new(i.sentence_id.clone(), [(0, 1)]));
    TranslationData::new(table, aligns)
}

pub fn model(cfg: ModelConfig, instances: &[SegmentationInstance]) -> SegModel<f32> {
    let (src, tgt) = build_vocab(instances).expect("non-empty corpus");
    SegModel::new(cfg, src, tgt, 1).expect("valid config")
}

/// Random word pairs for the metric benchmarks.
pub fn word_pairs(n: usize, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(4..14);
            (word(&mut rng, len), word(&mut rng, len))
        })
        .unzip()
}

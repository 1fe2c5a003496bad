#![allow(dead_code)]

pub mod gradcheck;
pub mod homographs;
pub mod oracles;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeg::alignment::SentenceAlignment;
use transeg::corpus::SegmentationInstance;
use transeg::trans_repr::TranslationEmbeddings;

pub const CONSONANTS: &[char] = &['p', 't', 'k', 'n', 'l'];
pub const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

/// Two CV syllables.
pub fn stem(rng: &mut impl Rng) -> String {
    let mut s = String::new();
    for _ in 0..2 {
        s.push(*CONSONANTS.choose(rng).unwrap());
        s.push(*VOWELS.choose(rng).unwrap());
    }
    s
}

/// Concatenative morphology: the surface is the stem plus the suffix
/// letters, the canonical form marks each boundary with `-`. Suffix
/// consonants never occur in stems.
pub fn inflect(stem: &str, suffix: &str) -> (String, String) {
    if suffix.is_empty() {
        return (stem.to_owned(), stem.to_owned());
    }
    (format!("{stem}{}", suffix.replace('-', "")), format!("{stem}-{suffix}"))
}

/// `n` distinct (surface, canonical) pairs.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<SegmentationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suffixes = ["", "s", "ri", "go", "mu", "da-s"];
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let st = stem(&mut rng);
        let (surface, canonical) = inflect(&st, suffixes.choose(&mut rng).unwrap());
        if seen.insert(surface.clone()) {
            out.push(SegmentationInstance::new(surface, canonical, format!("s{}", out.len()), 0));
        }
    }
    out
}

/// Random translation vectors for every instance's sentence and a
/// one-to-one alignment for its word.
pub fn random_translations(instances: &[SegmentationInstance], dim: usize, seed: u64) -> (Vec<TranslationEmbeddings>, Vec<SentenceAlignment>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vec = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let mut records = Vec::new();
    let mut aligns = Vec::new();
    for i in instances {
        let words = (0..=i.word_index).map(|_| vec(&mut rng)).collect();
        records.push(TranslationEmbeddings {
            sentence_id: i.sentence_id.clone(),
            dim,
            cls: vec(&mut rng),
            words,
        });
        aligns.push(SentenceAlignment::new(i.sentence_id.clone(), [(i.word_index, i.word_index)]));
    }
    (records, aligns)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use transeg::alignment::SentenceAlignment;
use transeg::corpus::SegmentationInstance;
use transeg::model::TranslationData;
use transeg::trans_repr::TranslationEmbeddings;

use super::{CONSONANTS, VOWELS};

/// Words whose two readings differ only in where the boundary falls; the
/// reading is recoverable from the translation vector alone.
pub struct Homographs {
    pub train: Vec<SegmentationInstance>,
    pub dev: Vec<SegmentationInstance>,
    pub translations: TranslationData,
    pub dim: usize,
}

fn syllables(rng: &mut impl Rng) -> [String; 3] {
    std::array::from_fn(|_| format!("{}{}", CONSONANTS[rng.random_range(0..CONSONANTS.len())], VOWELS[rng.random_range(0..VOWELS.len())]))
}

/// `forms` three-syllable surfaces. Sense 0 splits after the first
/// syllable, sense 1 after the second; sense `k` is signalled by the unit
/// vector `e_k` plus Gaussian noise of scale `noise`.
pub fn homograph_corpus(forms: usize, train_copies: usize, dim: usize, noise: f64, seed: u64) -> Homographs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut surfaces = std::collections::BTreeSet::new();
    let mut words = Vec::new();
    while words.len() < forms {
        let s = syllables(&mut rng);
        if surfaces.insert(s.concat()) {
            words.push(s);
        }
    }
    let gauss = Normal::new(0.0, noise).unwrap();
    let mut table = std::collections::HashMap::new();
    let mut aligns = Vec::new();
    let mut make = |rng: &mut ChaCha8Rng, w: &[String; 3], sense: usize| {
        let id = format!("h{}", table.len());
        let v: Vec<f64> = (0..dim).map(|d| f64::from(u8::from(d == sense)) + gauss.sample(rng)).collect();
        table.insert(
            id.clone(),
            TranslationEmbeddings {
                sentence_id: id.clone(),
                dim,
                cls: v.clone(),
                words: vec![v],
            },
        );
        aligns.push(SentenceAlignment::new(id.clone(), [(0, 0)]));
        let canonical = if sense == 0 { format!("{}-{}{}", w[0], w[1], w[2]) } else { format!("{}{}-{}", w[0], w[1], w[2]) };
        SegmentationInstance::new(w.concat(), canonical, id, 0)
    };
    let mut train = Vec::new();
    let mut dev = Vec::new();
    for w in &words {
        for sense in 0..2 {
            for _ in 0..train_copies {
                train.push(make(&mut rng, w, sense));
            }
            dev.push(make(&mut rng, w, sense));
        }
    }
    Homographs {
        train,
        dev,
        translations: TranslationData::new(table, aligns),
        dim,
    }
}

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transeg::train::{edit_distance_total, morpheme_f1, whole_word_accuracy, F1Mode};
use unicode_normalization::UnicodeNormalization;

fn nfd(s: &str) -> Vec<char> {
    s.nfd().collect()
}

/// Memoized recursion over prefix lengths.
pub fn levenshtein_ref(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == 0 {
            return j;
        }
        if j == 0 {
            return i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = if a[i - 1] == b[j - 1] {
            go(a, b, i - 1, j - 1, memo)
        } else {
            1 + go(a, b, i - 1, j, memo).min(go(a, b, i, j - 1, memo)).min(go(a, b, i - 1, j - 1, memo))
        };
        memo.insert((i, j), d);
        d
    }
    let (a, b) = (nfd(a), nfd(b));
    go(&a, &b, a.len(), b.len(), &mut HashMap::new())
}

fn pieces(w: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in w.nfd() {
        if c == sep {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out.retain(|m| !m.is_empty());
    out
}

/// Matched morphemes, removing each gold morpheme once it is used.
fn overlap_ref(pred: &[String], gold: &[String]) -> usize {
    let mut pool = gold.to_vec();
    let mut hits = 0;
    for m in pred {
        if let Some(k) = pool.iter().position(|g| g == m) {
            pool.remove(k);
            hits += 1;
        }
    }
    hits
}

fn f1_from_counts(o: usize, np: usize, ng: usize) -> f64 {
    if o == 0 {
        0.0
    } else {
        2.0 * o as f64 / (np + ng) as f64
    }
}

pub fn micro_f1_ref(pairs: &[(String, String)], sep: char) -> f64 {
    let (mut o, mut np, mut ng) = (0, 0, 0);
    for (p, g) in pairs {
        let (p, g) = (pieces(p, sep), pieces(g, sep));
        o += overlap_ref(&p, &g);
        np += p.len();
        ng += g.len();
    }
    f1_from_counts(o, np, ng)
}

pub fn macro_f1_ref(pairs: &[(String, String)], sep: char) -> f64 {
    let total: f64 = pairs
        .iter()
        .map(|(p, g)| {
            let (p, g) = (pieces(p, sep), pieces(g, sep));
            f1_from_counts(overlap_ref(&p, &g), p.len(), g.len())
        })
        .sum();
    total / pairs.len() as f64
}

pub fn accuracy_ref(pairs: &[(String, String)]) -> f64 {
    let hits = pairs.iter().filter(|(p, g)| nfd(p) == nfd(g)).count();
    hits as f64 / pairs.len() as f64
}

/// Random (prediction, gold) pairs with precomposed and decomposed
/// accents, repeated and empty morphemes, and many exact matches.
pub fn random_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = ["a", "b", "k", "t", "e", "é", "e\u{301}", "ñ", "o", "-", "-", "--"];
    let word = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(0..9);
        (0..len).map(|_| *atoms.choose(rng).unwrap()).collect::<String>()
    };
    (0..n)
        .map(|_| {
            let g = word(&mut rng);
            let p = match rng.random_range(0..4) {
                0 => g.clone(),
                1 => g.nfc().collect(),
                _ => word(&mut rng),
            };
            (p, g)
        })
        .collect()
}

/// Compares the library metrics against the references; returns the
/// largest F1 deviation.
pub fn check_metrics(pairs: &[(String, String)]) -> Result<f64, String> {
    let preds: Vec<&str> = pairs.iter().map(|(p, _)| p.as_str()).collect();
    let golds: Vec<&str> = pairs.iter().map(|(_, g)| g.as_str()).collect();
    let acc = whole_word_accuracy(&preds, &golds).unwrap();
    if acc != accuracy_ref(pairs) {
        return Err(format!("accuracy {acc} vs {}", accuracy_ref(pairs)));
    }
    let ed = edit_distance_total(&preds, &golds).unwrap();
    let ed_ref: usize = pairs.iter().map(|(p, g)| levenshtein_ref(p, g)).sum();
    if ed != ed_ref {
        return Err(format!("edit distance {ed} vs {ed_ref}"));
    }
    let micro = morpheme_f1(&preds, &golds, '-', F1Mode::Micro).unwrap().f1;
    let macro_ = morpheme_f1(&preds, &golds, '-', F1Mode::Macro).unwrap().f1;
    let dev = (micro - micro_f1_ref(pairs, '-')).abs().max((macro_ - macro_f1_ref(pairs, '-')).abs());
    if dev > 1e-12 {
        return Err(format!("F1 deviation {dev:e}"));
    }
    Ok(dev)
}

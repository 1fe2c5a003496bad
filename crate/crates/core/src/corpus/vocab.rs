use std::collections::{BTreeSet, HashMap};

use super::{CorpusError, SegmentationInstance};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;
pub const RESERVED: usize = 4;

/// Rendered in place of any special symbol that reaches decoded output.
pub const REPLACEMENT: char = '\u{FFFD}';

/// Character inventory with the four reserved symbols at indices 0..4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl Vocabulary {
    /// Builds from a set of characters; order is by code point.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let chars: Vec<char> = chars.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i + RESERVED)).collect();
        Self { chars, index }
    }

    pub fn len(&self) -> usize {
        self.chars.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn id(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    pub fn symbol(&self, id: usize) -> Option<char> {
        id.checked_sub(RESERVED).and_then(|i| self.chars.get(i)).copied()
    }

    pub fn encode(&self, s: &str) -> Vec<usize> {
        s.chars().map(|c| self.id(c)).collect()
    }

    /// Decodes up to the first EOS; PAD, BOS and UNK render as
    /// [`REPLACEMENT`].
    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter()
            .take_while(|&&id| id != EOS)
            .map(|&id| self.symbol(id).unwrap_or(REPLACEMENT))
            .collect()
    }
}

/// Source and target vocabularies from the training split only.
pub fn build_vocab(train: &[SegmentationInstance]) -> Result<(Vocabulary, Vocabulary), CorpusError> {
    if train.is_empty() {
        return Err(CorpusError::EmptyTrainSet);
    }
    let source = Vocabulary::from_chars(train.iter().flat_map(|i| i.surface.chars()));
    let target = Vocabulary::from_chars(train.iter().flat_map(|i| i.canonical.chars()));
    Ok((source, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_then_chars() {
        let (src, tgt) = build_vocab(&[SegmentationInstance::new("ab", "a-b", "s0", 0)]).unwrap();
        assert_eq!(src.len(), 6);
        assert_eq!(src.id('a'), 4);
        assert_eq!(src.id('b'), 5);
        assert_eq!(tgt.len(), 7);
        assert_ne!(tgt.id('-'), UNK);
        assert_eq!(src.id('-'), UNK);
    }

    #[test]
    fn unseen_maps_to_unk() {
        let (src, _) = build_vocab(&[SegmentationInstance::new("ab", "ab", "s0", 0)]).unwrap();
        assert_eq!(src.encode("aʕ"), vec![4, UNK]);
    }

    #[test]
    fn deterministic() {
        let data = [SegmentationInstance::new("zyx", "z-yx", "s0", 0), SegmentationInstance::new("abc", "abc", "s1", 0)];
        assert_eq!(build_vocab(&data).unwrap(), build_vocab(&data).unwrap());
    }

    #[test]
    fn empty_train() {
        assert!(matches!(build_vocab(&[]), Err(CorpusError::EmptyTrainSet)));
    }

    #[test]
    fn decode_stops_at_eos() {
        let v = Vocabulary::from_chars("ab".chars());
        assert_eq!(v.decode(&[4, UNK, 5, EOS, 4]), "a\u{FFFD}b");
    }
}

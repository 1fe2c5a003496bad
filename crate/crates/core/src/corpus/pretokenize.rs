use std::collections::BTreeSet;

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

/// Characters that would normally split as punctuation but belong inside
/// words for a particular language.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageRules {
    word_internal: BTreeSet<char>,
}

impl LanguageRules {
    pub fn new(word_internal: impl IntoIterator<Item = char>) -> Self {
        Self {
            word_internal: word_internal.into_iter().collect(),
        }
    }

    /// Rule set for a language name or ISO 639-3 code. Unknown names get
    /// the default rules.
    pub fn for_language(name: &str) -> Self {
        match name.to_lowercase().as_str() {
            // apostrophe (and its typographic variant) is a consonant
            "arapaho" | "arp" => Self::new(['\'', '\u{2019}']),
            _ => Self::default(),
        }
    }

    pub fn with_word_internal(&self, extra: impl IntoIterator<Item = char>) -> Self {
        let mut rules = self.clone();
        rules.word_internal.extend(extra);
        rules
    }

    pub fn is_word_internal(&self, c: char) -> bool {
        self.word_internal.contains(&c)
    }
}

/// ASCII symbol ranges count as punctuation, as do all Unicode `P*`
/// categories.
pub fn is_punctuation(c: char) -> bool {
    let cp = c as u32;
    if (33..=47).contains(&cp) || (58..=64).contains(&cp) || (91..=96).contains(&cp) || (123..=126).contains(&cp) {
        return true;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits on whitespace, then isolates each punctuation character as its
/// own token unless `rules` marks it word-internal.
pub fn pretokenize(line: &str, rules: &LanguageRules) -> Vec<String> {
    let mut out = Vec::new();
    for word in line.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if is_punctuation(c) && !rules.is_word_internal(c) {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
                out.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

pub fn normalize_nfd(s: &str) -> String {
    s.nfd().collect()
}

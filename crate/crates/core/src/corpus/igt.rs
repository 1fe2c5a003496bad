use std::fmt;

use super::pretokenize::{normalize_nfd, pretokenize, LanguageRules};
use super::CorpusError;

/// Line markers that identify each tier of an interlinear block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IgtSchema {
    pub transcription: String,
    pub canonical: String,
    pub gloss: Option<String>,
    pub translation: String,
}

impl Default for IgtSchema {
    fn default() -> Self {
        Self {
            transcription: "\\t".into(),
            canonical: "\\m".into(),
            gloss: Some("\\g".into()),
            translation: "\\l".into(),
        }
    }
}

/// One translated sentence of interlinear glossed text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IgtSentence {
    pub id: String,
    pub transcription: Vec<String>,
    pub canonical: Vec<String>,
    pub gloss: Option<Vec<String>>,
    pub translation: Vec<String>,
}

impl IgtSentence {
    pub fn is_aligned(&self) -> bool {
        self.transcription.len() == self.canonical.len()
    }
}

impl fmt::Display for IgtSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.transcription.join(" "))
    }
}

/// Synthetic id for the block at `index` (0-based, file order).
pub fn sentence_id(index: usize) -> String {
    format!("s{index}")
}

#[derive(Default)]
struct BlockLines<'a> {
    transcription: Option<&'a str>,
    canonical: Option<&'a str>,
    gloss: Option<&'a str>,
    translation: Option<&'a str>,
}

fn split_marker<'a>(line: &'a str, marker: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(marker)?;
    if rest.is_empty() {
        Some(rest)
    } else if rest.starts_with(char::is_whitespace) {
        Some(rest.trim_start())
    } else {
        None
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

fn parse_block(block: &[&str], index: usize, schema: &IgtSchema) -> Result<IgtSentence, CorpusError> {
    let mut lines = BlockLines::default();
    let block_no = index + 1;
    for line in block {
        let slot = if let Some(rest) = split_marker(line, &schema.transcription) {
            (&mut lines.transcription, rest)
        } else if let Some(rest) = split_marker(line, &schema.canonical) {
            (&mut lines.canonical, rest)
        } else if let Some(rest) = split_marker(line, &schema.translation) {
            (&mut lines.translation, rest)
        } else if let Some(rest) = schema.gloss.as_deref().and_then(|g| split_marker(line, g)) {
            (&mut lines.gloss, rest)
        } else {
            return Err(CorpusError::MalformedBlock {
                block: block_no,
                line: (*line).to_owned(),
            });
        };
        if slot.0.replace(slot.1).is_some() {
            return Err(CorpusError::MalformedBlock {
                block: block_no,
                line: (*line).to_owned(),
            });
        }
    }
    let missing = |marker: &str| CorpusError::MissingLine {
        block: block_no,
        marker: marker.to_owned(),
    };
    let transcription = lines.transcription.ok_or_else(|| missing(&schema.transcription))?;
    let canonical = lines.canonical.ok_or_else(|| missing(&schema.canonical))?;
    let translation = lines.translation.ok_or_else(|| missing(&schema.translation))?;
    Ok(IgtSentence {
        id: sentence_id(index),
        transcription: tokens(transcription),
        canonical: tokens(canonical),
        gloss: lines.gloss.map(tokens),
        translation: tokens(translation),
    })
}

/// Parses blank-line separated IGT blocks. Fields are whitespace-tokenized;
/// ids are assigned from each block's position in the file.
pub fn parse_igt(text: &str, schema: &IgtSchema) -> Result<Vec<IgtSentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    let lines = text.lines().map(|l| l.trim_end_matches('\r'));
    for line in lines.chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(parse_block(&block, sentences.len(), schema)?);
                block.clear();
            }
        } else {
            block.push(line.trim());
        }
    }
    Ok(sentences)
}

/// Applies pretokenization and NFD normalization to every tier.
///
/// The canonical tier additionally keeps the morpheme separators
/// word-internal so that segmented words stay whole.
pub fn prepare_sentence(sentence: &IgtSentence, rules: &LanguageRules, separators: &[char]) -> IgtSentence {
    let canonical_rules = rules.with_word_internal(separators.iter().copied());
    let english = LanguageRules::default();
    let tier = |words: &[String], rules: &LanguageRules| -> Vec<String> {
        pretokenize(&normalize_nfd(&words.join(" ")), rules)
    };
    IgtSentence {
        id: sentence.id.clone(),
        transcription: tier(&sentence.transcription, rules),
        canonical: tier(&sentence.canonical, &canonical_rules),
        gloss: sentence.gloss.clone(),
        translation: tier(&sentence.translation, &english),
    }
}

/// Keeps only sentences whose transcription and canonical tiers have the
/// same (nonzero) number of words.
pub fn validate(sentences: Vec<IgtSentence>) -> Vec<IgtSentence> {
    sentences
        .into_iter()
        .filter(|s| s.is_aligned() && !s.transcription.is_empty())
        .collect()
}

//! Sentence splitting, tokenization, stopword filtering and syllable counting.
//!
//! Everything here is deterministic and allocation-light; a [`PreparedText`]
//! is the unit handed to the readability, diversity and network stages.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations_en.txt");

/// Version tag of the bundled stopword list.
pub const STOPWORDS_VERSION: &str = "snowball-en-v1";

#[derive(Debug, Error)]
pub enum TextError {
    #[error("empty text")]
    EmptyText,
    #[error("text contains no words")]
    NoWords,
    #[error("cannot read word list {path}: {source}")]
    WordList {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Parses a plain-text word list: one entry per line, `#` starts a comment.
pub fn parse_word_list(contents: &str) -> BTreeSet<String> {
    contents
        .lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(|line| line.to_lowercase())
        .collect()
}

pub fn read_word_list(path: &Path) -> Result<BTreeSet<String>, TextError> {
    let contents = fs::read_to_string(path).map_err(|source| TextError::WordList {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_word_list(&contents))
}

/// A lowercase word occurrence and where it was found.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub sentence: usize,
    pub index: usize,
}

/// Which tokens are dropped before network construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopPolicy {
    pub stopwords: BTreeSet<String>,
    /// Domain terms that carry little information (e.g. "journal").
    pub extra_drop: BTreeSet<String>,
    pub drop_numeric: bool,
    pub merge_plural_singular: bool,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self {
            stopwords: parse_word_list(DEFAULT_STOPWORDS),
            extra_drop: ["journal", "journals"].iter().map(|s| s.to_string()).collect(),
            drop_numeric: true,
            merge_plural_singular: false,
        }
    }
}

impl StopPolicy {
    /// A policy that drops nothing.
    pub fn empty() -> Self {
        Self {
            stopwords: BTreeSet::new(),
            extra_drop: BTreeSet::new(),
            drop_numeric: false,
            merge_plural_singular: false,
        }
    }

    fn drops(&self, surface: &str) -> bool {
        self.stopwords.contains(surface)
            || self.extra_drop.contains(surface)
            || (self.drop_numeric && is_numeric(surface))
    }
}

/// Tokens with no alphabetic character ("2020", "1990-2000").
pub fn is_numeric(surface: &str) -> bool {
    surface.chars().any(|c| c.is_numeric()) && !surface.chars().any(char::is_alphabetic)
}

/// Sentence splitter with an abbreviation guard.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: BTreeSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self {
            abbreviations: parse_word_list(DEFAULT_ABBREVIATIONS),
        }
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations(abbreviations: BTreeSet<String>) -> Self {
        Self { abbreviations }
    }

    /// Splits on `.`, `!` and `?` followed by whitespace or end of input.
    ///
    /// A period closing a listed abbreviation does not end the sentence.
    /// Text without terminal punctuation is one sentence.
    pub fn split(&self, text: &str) -> Result<Vec<String>, TextError> {
        if text.trim().is_empty() {
            return Err(TextError::EmptyText);
        }
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut sentences = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if matches!(c, '.' | '!' | '?') {
                // swallow runs like "?!" or "..." and closing quotes/brackets
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '”' | '’')
                {
                    j += 1;
                }
                let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                if at_boundary && !(c == '.' && self.is_abbreviation(&text[start..pos + 1])) {
                    push_trimmed(&mut sentences, &text[start..end]);
                    start = end;
                }
                i = j;
            } else {
                i += 1;
            }
        }
        push_trimmed(&mut sentences, &text[start..]);
        Ok(sentences)
    }

    fn is_abbreviation(&self, upto_period: &str) -> bool {
        let last = upto_period
            .split_whitespace()
            .last()
            .unwrap_or("")
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        self.abbreviations.contains(&last)
    }
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

/// Splits with the bundled abbreviation list.
pub fn split_sentences(text: &str) -> Result<Vec<String>, TextError> {
    SentenceSplitter::default().split(text)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '’' | '‐')
}

/// Lowercase word tokens of one sentence.
///
/// Word characters are Unicode alphanumerics. Hyphens and apostrophes are
/// kept only between two word characters; everything else separates tokens.
pub fn tokenize(sentence: &str, sentence_index: usize) -> Vec<Token> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if is_joiner(c) && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()) {
            current.push(if c == '’' {
                '\''
            } else if c == '‐' {
                '-'
            } else {
                c
            });
        } else if !current.is_empty() {
            let index = tokens.len();
            tokens.push(Token {
                surface: std::mem::take(&mut current),
                sentence: sentence_index,
                index,
            });
        }
    }
    if !current.is_empty() {
        let index = tokens.len();
        tokens.push(Token {
            surface: current,
            sentence: sentence_index,
            index,
        });
    }
    tokens
}

// Plural forms that a naive suffix strip would mangle.
const PLURAL_GUARD: &[&str] = &[
    "analysis",
    "basis",
    "business",
    "crisis",
    "news",
    "process",
    "series",
    "species",
    "status",
    "thesis",
    "this",
    "various",
    "economics",
    "politics",
    "ethics",
    "mathematics",
    "statistics",
    "logistics",
    "analytics",
    "dynamics",
    "access",
    "less",
    "across",
    "us",
    "has",
    "is",
    "was",
];

/// Naive plural folding: "-ies" to "-y", "-ses"/"-xes"/"-ches"/"-shes" lose "-es",
/// other "-s" endings lose the "s". Guarded words and "-ss" endings are kept.
pub fn singularize(surface: &str) -> String {
    if surface.len() <= 3 || PLURAL_GUARD.contains(&surface) || surface.ends_with("ss") {
        return surface.to_string();
    }
    if let Some(stem) = surface.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if surface.ends_with(suffix) {
            return surface[..surface.len() - 2].to_string();
        }
    }
    if surface.ends_with("us") || surface.ends_with("is") {
        return surface.to_string();
    }
    match surface.strip_suffix('s') {
        Some(stem) => stem.to_string(),
        None => surface.to_string(),
    }
}

/// Removes stopwords, low-information terms and (optionally) numerals.
pub fn apply_stoppolicy(tokens: &[Token], policy: &StopPolicy) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !policy.drops(&t.surface))
        .map(|t| {
            if policy.merge_plural_singular {
                let surface = singularize(&t.surface);
                Token { surface, ..t.clone() }
            } else {
                t.clone()
            }
        })
        .filter(|t| !policy.drops(&t.surface))
        .collect()
}

/// Vowel-group syllable counter with an exception dictionary.
#[derive(Debug, Clone, Default)]
pub struct SyllableCounter {
    exceptions: HashMap<String, usize>,
}

impl SyllableCounter {
    pub fn with_exceptions(exceptions: HashMap<String, usize>) -> Self {
        Self { exceptions }
    }

    pub fn count(&self, word: &str) -> usize {
        if let Some(&n) = self.exceptions.get(word) {
            return n.max(1);
        }
        count_syllables(word)
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count of a lowercase word, at least 1.
///
/// Counts maximal vowel groups over `a e i o u y` plus one per run of digits,
/// then drops one for a silent final `e` after a consonant (kept for
/// consonant + `le`), and likewise for a silent `-es` or `-ed` ending.
pub fn count_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    let mut groups = 0usize;
    let mut prev_vowel = false;
    let mut prev_digit = false;
    for &c in &chars {
        let vowel = is_vowel(c);
        let digit = c.is_ascii_digit();
        if (vowel && !prev_vowel) || (digit && !prev_digit) {
            groups += 1;
        }
        prev_vowel = vowel;
        prev_digit = digit;
    }

    let n = chars.len();
    let consonant = |c: char| c.is_alphabetic() && !is_vowel(c);
    let silent = if n >= 3 && chars[n - 1] == 'e' && consonant(chars[n - 2]) {
        !(chars[n - 2] == 'l' && consonant(chars[n - 3]))
    } else if n >= 4 && chars[n - 2] == 'e' && chars[n - 1] == 's' && consonant(chars[n - 3]) {
        let le_ending = chars[n - 3] == 'l' && consonant(chars[n - 4]);
        !le_ending && !matches!(chars[n - 3], 's' | 'x' | 'z' | 'c' | 'g' | 'h')
    } else if n >= 4 && chars[n - 2] == 'e' && chars[n - 1] == 'd' && consonant(chars[n - 3]) {
        !matches!(chars[n - 3], 't' | 'd')
    } else {
        false
    };
    if silent {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

/// A text split into sentences and tokens, with the counts readability needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedText {
    pub sentences: Vec<Vec<Token>>,
    pub filtered_sentences: Vec<Vec<Token>>,
    pub word_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
}

impl PreparedText {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    pub fn filtered_tokens(&self) -> impl Iterator<Item = &Token> {
        self.filtered_sentences.iter().flatten()
    }
}

/// Text preparation with configurable word lists.
#[derive(Debug, Clone, Default)]
pub struct Preparer {
    pub policy: StopPolicy,
    pub splitter: SentenceSplitter,
    pub syllables: SyllableCounter,
}

impl Preparer {
    pub fn new(policy: StopPolicy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }

    pub fn prepare(&self, text: &str) -> Result<PreparedText, TextError> {
        let raw = self.splitter.split(text)?;
        // sentences made only of punctuation are not counted
        let sentences: Vec<Vec<Token>> = raw
            .iter()
            .map(|s| tokenize(s, 0))
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(i, mut tokens)| {
                tokens.iter_mut().for_each(|t| t.sentence = i);
                tokens
            })
            .collect();
        if sentences.is_empty() {
            return Err(TextError::NoWords);
        }
        let filtered_sentences = sentences.iter().map(|s| apply_stoppolicy(s, &self.policy)).collect();
        let word_count = sentences.iter().map(Vec::len).sum();
        let syllable_count = sentences
            .iter()
            .flatten()
            .map(|t| self.syllables.count(&t.surface))
            .sum();
        Ok(PreparedText {
            sentence_count: sentences.len(),
            sentences,
            filtered_sentences,
            word_count,
            syllable_count,
        })
    }
}

/// Prepares `text` with the bundled splitter and syllable rules.
pub fn prepare(text: &str, policy: &StopPolicy) -> Result<PreparedText, TextError> {
    Preparer::new(policy.clone()).prepare(text)
}

//! Message text normalization, tokenization and stemming.
//!
//! The cleaning rules run in a fixed order:
//!
//! 1. decode HTML entities, strip markup
//! 2. drop URLs (`http://`, `https://`, `www.` and bare `t.co/` links)
//! 3. drop `@mentions` and `#hashtags` as whole tokens
//! 4. drop emoji code points and ASCII smileys
//! 5. drop the reserved tokens `RT` and `FAV`
//! 6. lowercase, replace anything that is not an ASCII letter or digit with a
//!    space, collapse whitespace
//!
//! The result only ever contains `[a-z0-9 ]`, and running it again is a no-op.

mod ingest;

pub use ingest::{parse_messages, read_messages, write_messages, IngestError};

use std::collections::HashSet;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};

/// Default minimum token length kept by [`tokenize`].
pub const DEFAULT_MIN_LEN: usize = 3;

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const SMILEYS: &str = include_str!("../../data/smileys.txt");

/// One ingested social-media message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMessage {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub author: String,
    pub text: String,
    pub is_retweet: bool,
}

/// Normalized, stemmed tokens of one message.
///
/// `token_ids` stays empty until the document is attached to a dictionary,
/// after which it holds the ids of the tokens the dictionary knows about.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub message_id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub token_ids: Vec<u32>,
}

/// A set of words removed by [`tokenize`].
#[derive(Debug, Clone, Default)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(STOPWORDS_EN)
    }

    /// One entry per line, `#` starts a comment line. Entries are lowercased.
    pub fn parse(text: &str) -> Self {
        let words = data_lines(text).map(|l| l.to_lowercase()).collect();
        Self { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self {
            words: iter.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }
}

/// Non-empty, non-comment, trimmed lines of a plain-text data file.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// ASCII emoticon table.
///
/// Entries made only of `[a-z0-9]` are refused: normalized output consists of
/// exactly those characters, so such an entry would make a second pass remove
/// words the first pass kept.
#[derive(Debug, Clone)]
pub struct SmileyTable {
    entries: HashSet<String>,
    // entries starting with punctuation, matched as a token suffix ("fun:D")
    suffixes: Vec<String>,
}

impl SmileyTable {
    pub fn bundled() -> Self {
        Self::parse(SMILEYS)
    }

    pub fn parse(text: &str) -> Self {
        let entries: HashSet<String> = data_lines(text)
            .filter(|e| e.chars().any(|c| !(c.is_ascii_lowercase() || c.is_ascii_digit())))
            .map(str::to_string)
            .collect();
        let mut suffixes: Vec<String> = entries
            .iter()
            .filter(|e| e.chars().next().is_some_and(|c| !c.is_alphanumeric()) && e.len() >= 2)
            .cloned()
            .collect();
        // longest first so ":-D" wins over "-D"-like shorter overlaps
        suffixes.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Self { entries, suffixes }
    }

    fn strip<'a>(&self, token: &'a str) -> Option<&'a str> {
        if self.entries.contains(token) {
            return None;
        }
        for s in &self.suffixes {
            if let Some(rest) = token.strip_suffix(s.as_str()) {
                if !rest.is_empty() {
                    return Some(rest);
                }
            }
        }
        Some(token)
    }
}

static MARKUP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^<>]*>").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:[a-z][a-z0-9+.\-]*://\S+|www\.\S+|\bt\.co/\S*)").unwrap()
});
static MENTION_OR_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[@#]\w+").unwrap());
static RESERVED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(?:RT|FAV)\b").unwrap());
static DEFAULT_NORMALIZER: LazyLock<Normalizer> = LazyLock::new(Normalizer::default);

/// Applies the cleaning rules with a configurable smiley table.
#[derive(Debug, Clone)]
pub struct Normalizer {
    smileys: SmileyTable,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::new(SmileyTable::bundled())
    }
}

impl Normalizer {
    pub fn new(smileys: SmileyTable) -> Self {
        Self { smileys }
    }

    pub fn normalize(&self, text: &str) -> String {
        let decoded = html_escape::decode_html_entities(text);
        let s = MARKUP.replace_all(&decoded, " ");
        let s = URL.replace_all(&s, " ");
        let s = MENTION_OR_TAG.replace_all(&s, " ");
        let s: String = s.chars().map(|c| if is_emoji(c) { ' ' } else { c }).collect();
        let s = s
            .split_whitespace()
            .filter_map(|t| self.smileys.strip(t))
            .collect::<Vec<_>>()
            .join(" ");
        let s = RESERVED.replace_all(&s, " ");

        let mut out = String::with_capacity(s.len());
        let mut pending_space = false;
        for c in s.chars() {
            if c.is_ascii_alphanumeric() {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c.to_ascii_lowercase());
            } else {
                pending_space = true;
            }
        }
        out
    }
}

fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // pictographs, emoticons, transport, flags, supplemental
        | 0x2300..=0x23FF   // misc technical (watch, hourglass)
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2B00..=0x2BFF   // arrows, stars
        | 0xFE00..=0xFE0F   // variation selectors
        | 0x200D            // zero width joiner
        | 0x20E3            // keycap
        | 0xE0020..=0xE007F // tag sequences
    )
}

/// Cleans raw message text using the bundled smiley table.
pub fn normalize(text: &str) -> String {
    DEFAULT_NORMALIZER.normalize(text)
}

/// Splits normalized text on whitespace, dropping short tokens and stopwords.
pub fn tokenize(clean: &str, stopwords: &Stopwords, min_len: usize) -> Vec<String> {
    clean
        .split_whitespace()
        .filter(|t| t.chars().count() >= min_len && !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

/// Porter stem of a lowercase token.
///
/// Tokens shorter than three characters or containing digits have no
/// applicable rule and come back unchanged.
pub fn stem(token: &str) -> String {
    if token.len() < 3 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    porter_stemmer::stem(token)
}

/// Normalize, tokenize and stem a message.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub normalizer: Normalizer,
    pub stopwords: Stopwords,
    pub min_len: usize,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self {
            normalizer: Normalizer::default(),
            stopwords: Stopwords::english(),
            min_len: DEFAULT_MIN_LEN,
        }
    }
}

impl Preprocessor {
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let clean = self.normalizer.normalize(text);
        tokenize(&clean, &self.stopwords, self.min_len)
            .iter()
            .map(|t| stem(t))
            .collect()
    }

    pub fn document(&self, msg: &RawMessage) -> TokenizedDoc {
        TokenizedDoc {
            message_id: msg.id.clone(),
            tokens: self.tokens(&msg.text),
            token_ids: Vec::new(),
        }
    }
}

/// `stem ∘ tokenize ∘ normalize` over the message text, with the default
/// smiley table and minimum length.
pub fn preprocess_document(msg: &RawMessage, stopwords: &Stopwords) -> TokenizedDoc {
    let clean = normalize(&msg.text);
    TokenizedDoc {
        message_id: msg.id.clone(),
        tokens: tokenize(&clean, stopwords, DEFAULT_MIN_LEN)
            .iter()
            .map(|t| stem(t))
            .collect(),
        token_ids: Vec::new(),
    }
}

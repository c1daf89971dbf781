//! Editable word lists backing the baseline classifiers.
//!
//! File format: one or more lines per label, the first whitespace-separated
//! token is the label and the rest are terms. `#` starts a comment line.
//! Terms are lowercased and stemmed on load so they compare equal to
//! document tokens. Binary category files use the category name (or
//! `relevant`) as the label.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::{Category, ClassifyError, Indicator};
use crate::text::{stem, TokenizedDoc};

#[derive(Debug, Clone)]
pub struct Lexicon {
    indicator: Indicator,
    terms: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn parse(indicator: Indicator, text: &str) -> Result<Self, ClassifyError> {
        let mut terms: HashMap<String, Vec<usize>> = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let label = parts.next().unwrap_or_default();
            let idx = match indicator {
                Indicator::Binary(c) if label == c.name() => indicator.label_index("relevant"),
                _ => indicator.label_index(label),
            }
            .ok_or_else(|| ClassifyError::LexiconFormat {
                name: indicator.to_string(),
                line: n + 1,
                message: format!("unknown label {label:?}"),
            })?;
            for t in parts {
                let slot = terms.entry(stem(&t.to_lowercase())).or_default();
                if !slot.contains(&idx) {
                    slot.push(idx);
                }
            }
        }
        Ok(Self { indicator, terms })
    }

    /// Builds a lexicon from `(label, terms)` pairs.
    pub fn from_terms<'a>(
        indicator: Indicator,
        entries: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
    ) -> Result<Self, ClassifyError> {
        let text: String = entries
            .into_iter()
            .map(|(l, ts)| format!("{l} {}\n", ts.join(" ")))
            .collect();
        Self::parse(indicator, &text)
    }

    pub fn indicator(&self) -> Indicator {
        self.indicator
    }

    pub fn contains(&self, token: &str) -> bool {
        self.terms.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Per-label hit counts, indexed like `indicator.labels()`.
    pub fn hits(&self, doc: &TokenizedDoc) -> Vec<f64> {
        let mut h = vec![0.0; self.indicator.labels().len()];
        for t in &doc.tokens {
            if let Some(labels) = self.terms.get(t) {
                for &i in labels {
                    h[i] += 1.0;
                }
            }
        }
        h
    }
}

fn file_stem(indicator: Indicator) -> String {
    match indicator {
        Indicator::Binary(c) => c.name().to_string(),
        other => other.to_string(),
    }
}

const ALL_INDICATORS: [Indicator; 9] = [
    Indicator::Sentiment,
    Indicator::Emotion,
    Indicator::Intent,
    Indicator::Abuse,
    Indicator::Sarcasm,
    Indicator::Phase,
    Indicator::Binary(Category::Disaster),
    Indicator::Binary(Category::Medical),
    Indicator::Binary(Category::Humanitarian),
];

fn bundled_text(indicator: Indicator) -> &'static str {
    match indicator {
        Indicator::Sentiment => include_str!("../../data/lexicons/sentiment.txt"),
        Indicator::Emotion => include_str!("../../data/lexicons/emotion.txt"),
        Indicator::Intent => include_str!("../../data/lexicons/intent.txt"),
        Indicator::Abuse => include_str!("../../data/lexicons/abuse.txt"),
        Indicator::Sarcasm => include_str!("../../data/lexicons/sarcasm.txt"),
        Indicator::Phase => include_str!("../../data/lexicons/phase.txt"),
        Indicator::Binary(Category::Disaster) => include_str!("../../data/lexicons/disaster.txt"),
        Indicator::Binary(Category::Medical) => include_str!("../../data/lexicons/medical.txt"),
        Indicator::Binary(Category::Humanitarian) => include_str!("../../data/lexicons/humanitarian.txt"),
    }
}

/// All lexicons the baseline uses, keyed by indicator. Any may be absent.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    lexicons: BTreeMap<Indicator, Lexicon>,
}

impl LexiconSet {
    pub fn bundled() -> Self {
        let mut set = Self::default();
        for ind in ALL_INDICATORS {
            set.insert(Lexicon::parse(ind, bundled_text(ind)).expect("bundled lexicons are valid"));
        }
        set
    }

    /// Loads `<name>.txt` files from a directory (`sentiment.txt`,
    /// `disaster.txt`, ...). Missing files leave that lexicon absent.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        let mut set = Self::default();
        for ind in ALL_INDICATORS {
            let path = dir.as_ref().join(format!("{}.txt", file_stem(ind)));
            if path.is_file() {
                set.insert(Lexicon::parse(ind, &fs::read_to_string(path)?)?);
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, lexicon: Lexicon) {
        self.lexicons.insert(lexicon.indicator(), lexicon);
    }

    pub fn remove(&mut self, indicator: Indicator) -> Option<Lexicon> {
        self.lexicons.remove(&indicator)
    }

    pub fn get(&self, indicator: Indicator) -> Result<&Lexicon, ClassifyError> {
        self.lexicons
            .get(&indicator)
            .ok_or_else(|| ClassifyError::LexiconMissing(indicator.to_string()))
    }

    /// Concatenated source-independent digest input: every term with its
    /// labels, sorted. Used for provenance hashing.
    pub fn fingerprint(&self) -> String {
        let mut out = String::new();
        for (ind, lex) in &self.lexicons {
            let mut terms: Vec<_> = lex.terms.iter().collect();
            terms.sort();
            for (t, ls) in terms {
                out.push_str(&format!("{ind}\t{t}\t{ls:?}\n"));
            }
        }
        out
    }
}

//! Message filtering and behavioral scoring.
//!
//! Two classifier back ends sit behind the same interface: a deterministic
//! lexicon baseline ([`baseline`]) and a remote HTTP service ([`remote`])
//! speaking the `/classify` JSON contract. Either way the result per
//! indicator is a [`ClassScores`] distribution over a fixed label set.

pub mod baseline;
pub mod filter;
pub mod lexicon;
pub mod remote;

pub use baseline::{behavioral_profile, classify_binary, classify_sentiment, phase_categorize, BaselineClassifier};
pub use filter::{
    filter_pipeline, flag_known_accounts, AccountList, FilterCategory, FilterItem, FilterOutcome, FilteredSet,
    MessageClassifier, PositiveShare, Source, Verdict,
};
pub use lexicon::{Lexicon, LexiconSet};
pub use remote::{remote_classify, RemoteClassifier};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("lexicon for {0} not loaded")]
    LexiconMissing(String),
    #[error("lexicon {name} line {line}: {message}")]
    LexiconFormat { name: String, line: usize, message: String },
    #[error("remote classifier unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("remote classifier protocol error: {0}")]
    ProtocolError(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Disaster,
    Medical,
    Humanitarian,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Disaster, Category::Medical, Category::Humanitarian];

    pub fn name(self) -> &'static str {
        match self {
            Category::Disaster => "disaster",
            Category::Medical => "medical",
            Category::Humanitarian => "humanitarian",
        }
    }
}

/// A family of labels a message is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    Sentiment,
    Emotion,
    Intent,
    Abuse,
    Sarcasm,
    Phase,
    Binary(Category),
}

const SENTIMENT: &[&str] = &["negative", "neutral", "positive"];
const EMOTION: &[&str] = &["angry", "bored", "excited", "fear", "happy", "sad"];
const INTENT: &[&str] = &["feedback", "marketing", "news", "query", "spam"];
const ABUSE: &[&str] = &["abusive", "hate_speech", "neither"];
const SARCASM: &[&str] = &["non_sarcastic", "sarcastic"];
const PHASE: &[&str] = &[
    "mitigation",
    "preparedness",
    "prevention_awareness",
    "recovery_essentials",
    "recovery_needs",
    "response",
];
const BINARY: &[&str] = &["irrelevant", "relevant"];

impl Indicator {
    /// The five behavioral indicators, in reporting order.
    pub const BEHAVIORAL: [Indicator; 5] = [
        Indicator::Sentiment,
        Indicator::Emotion,
        Indicator::Intent,
        Indicator::Abuse,
        Indicator::Sarcasm,
    ];

    /// Every indicator a remote service may be asked for.
    pub const ALL: [Indicator; 9] = [
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

    /// Fixed label set, sorted, so the lowest index is the lexicographically
    /// first label.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Indicator::Sentiment => SENTIMENT,
            Indicator::Emotion => EMOTION,
            Indicator::Intent => INTENT,
            Indicator::Abuse => ABUSE,
            Indicator::Sarcasm => SARCASM,
            Indicator::Phase => PHASE,
            Indicator::Binary(_) => BINARY,
        }
    }

    pub fn label_index(self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| *l == label)
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indicator::Sentiment => f.write_str("sentiment"),
            Indicator::Emotion => f.write_str("emotion"),
            Indicator::Intent => f.write_str("intent"),
            Indicator::Abuse => f.write_str("abuse"),
            Indicator::Sarcasm => f.write_str("sarcasm"),
            Indicator::Phase => f.write_str("phase"),
            Indicator::Binary(c) => write!(f, "binary:{}", c.name()),
        }
    }
}

impl FromStr for Indicator {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sentiment" => Indicator::Sentiment,
            "emotion" => Indicator::Emotion,
            "intent" => Indicator::Intent,
            "abuse" => Indicator::Abuse,
            "sarcasm" => Indicator::Sarcasm,
            "phase" => Indicator::Phase,
            "binary:disaster" => Indicator::Binary(Category::Disaster),
            "binary:medical" => Indicator::Binary(Category::Medical),
            "binary:humanitarian" => Indicator::Binary(Category::Humanitarian),
            other => return Err(ClassifyError::ProtocolError(format!("unknown indicator {other:?}"))),
        })
    }
}

/// Confidence distribution over an indicator's label set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    indicator: Indicator,
    scores: Vec<f64>,
    dominant: usize,
}

impl ClassScores {
    /// Add-one softened counts: `(hits[l] + 1) / (sum(hits) + |labels|)`.
    /// `hits` is indexed like `indicator.labels()`.
    pub fn softened(indicator: Indicator, hits: &[f64]) -> Self {
        let n = indicator.labels().len();
        debug_assert_eq!(hits.len(), n);
        let total: f64 = hits.iter().sum::<f64>() + n as f64;
        let scores: Vec<f64> = hits.iter().map(|h| (h + 1.0) / total).collect();
        Self::with_argmax(indicator, scores)
    }

    fn with_argmax(indicator: Indicator, scores: Vec<f64>) -> Self {
        let mut dominant = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[dominant] {
                dominant = i;
            }
        }
        Self { indicator, scores, dominant }
    }

    /// Validates a label → score map against the indicator's closed label
    /// set. Every label must be present, scores must lie in `[0, 1]` and sum
    /// to one within `1e-6`; they are renormalized exactly afterwards.
    pub fn from_map(
        indicator: Indicator,
        map: &BTreeMap<String, f64>,
        dominant: Option<&str>,
    ) -> Result<Self, ClassifyError> {
        let labels = indicator.labels();
        let proto = |m: String| ClassifyError::ProtocolError(m);
        for k in map.keys() {
            if indicator.label_index(k).is_none() {
                return Err(proto(format!("unknown label {k:?} for {indicator}")));
            }
        }
        let mut scores = Vec::with_capacity(labels.len());
        for l in labels {
            let s = *map
                .get(*l)
                .ok_or_else(|| proto(format!("missing label {l:?} for {indicator}")))?;
            if !(0.0..=1.0).contains(&s) {
                return Err(proto(format!("score {s} for {l:?} outside [0, 1]")));
            }
            scores.push(s);
        }
        let total: f64 = scores.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(proto(format!("{indicator} scores sum to {total}")));
        }
        scores.iter_mut().for_each(|s| *s /= total);
        let mut out = Self::with_argmax(indicator, scores);
        if let Some(d) = dominant {
            out.dominant = indicator
                .label_index(d)
                .ok_or_else(|| proto(format!("unknown dominant label {d:?} for {indicator}")))?;
        }
        Ok(out)
    }

    /// Overrides the dominant label. Panics on a label outside the set.
    pub(crate) fn with_dominant(mut self, label: &str) -> Self {
        self.dominant = self.indicator.label_index(label).expect("label in indicator set");
        self
    }

    pub fn indicator(&self) -> Indicator {
        self.indicator
    }

    pub fn dominant(&self) -> &'static str {
        self.indicator.labels()[self.dominant]
    }

    pub fn score(&self, label: &str) -> Option<f64> {
        self.indicator.label_index(label).map(|i| self.scores[i])
    }

    /// `(label, score)` pairs in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.indicator.labels().iter().copied().zip(self.scores.iter().copied())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(l, s)| (l.to_string(), s)).collect()
    }
}

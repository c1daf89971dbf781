//! Category filtering over a message collection.
//!
//! Filtered sets carry message ids in ingestion order, so every id can be
//! traced back to the original message.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::text::{data_lines, RawMessage, TokenizedDoc};

/// Per-message classifier decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Verdict {
    pub disaster: bool,
    pub medical: bool,
    pub humanitarian: bool,
    pub positive: bool,
}

/// A message as seen by a classifier: remote back ends need the raw text,
/// the baseline needs the tokens.
#[derive(Debug, Clone, Copy)]
pub struct FilterItem<'a> {
    pub id: &'a str,
    pub text: &'a str,
    pub doc: &'a TokenizedDoc,
}

pub trait MessageClassifier {
    fn source(&self) -> Source;

    /// One verdict per item, in item order.
    fn verdicts(&self, items: &[FilterItem<'_>]) -> Result<Vec<Verdict>, ClassifyError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterCategory {
    Disaster,
    DisasterMedical,
    DisasterHumanitarian,
    Positive,
}

impl FilterCategory {
    pub const ALL: [FilterCategory; 4] = [
        FilterCategory::Disaster,
        FilterCategory::DisasterMedical,
        FilterCategory::DisasterHumanitarian,
        FilterCategory::Positive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterCategory::Disaster => "disaster",
            FilterCategory::DisasterMedical => "disaster_medical",
            FilterCategory::DisasterHumanitarian => "disaster_humanitarian",
            FilterCategory::Positive => "positive",
        }
    }
}

impl fmt::Display for FilterCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Baseline,
    Remote,
    KnownAccount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredSet {
    pub category: FilterCategory,
    pub message_ids: Vec<String>,
    pub source: Source,
}

impl FilteredSet {
    pub fn len(&self) -> usize {
        self.message_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.message_ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.message_ids.iter().any(|m| m == id)
    }
}

/// The four classifier sets of one filtering run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub sets: BTreeMap<FilterCategory, FilteredSet>,
}

impl FilterOutcome {
    pub fn get(&self, c: FilterCategory) -> &FilteredSet {
        &self.sets[&c]
    }

    /// Positive messages within category `c`.
    pub fn positive_share(&self, c: FilterCategory) -> PositiveShare {
        let positive: HashSet<&str> = self.get(FilterCategory::Positive).message_ids.iter().map(String::as_str).collect();
        let set = self.get(c);
        PositiveShare {
            positive: set.message_ids.iter().filter(|id| positive.contains(id.as_str())).count() as u64,
            total: set.len() as u64,
        }
    }
}

/// Classifies every item and derives the four sets. Medical and
/// humanitarian sets only ever contain disaster messages.
pub fn filter_pipeline(
    items: &[FilterItem<'_>],
    classifier: &dyn MessageClassifier,
) -> Result<FilterOutcome, ClassifyError> {
    let verdicts = classifier.verdicts(items)?;
    if verdicts.len() != items.len() {
        return Err(ClassifyError::ProtocolError(format!(
            "classifier returned {} verdicts for {} messages",
            verdicts.len(),
            items.len()
        )));
    }
    let source = classifier.source();
    let mut sets: BTreeMap<FilterCategory, FilteredSet> = FilterCategory::ALL
        .iter()
        .map(|&c| (c, FilteredSet { category: c, message_ids: Vec::new(), source }))
        .collect();
    for (item, v) in items.iter().zip(&verdicts) {
        let mut push = |c: FilterCategory| sets.get_mut(&c).unwrap().message_ids.push(item.id.to_string());
        if v.disaster {
            push(FilterCategory::Disaster);
            if v.medical {
                push(FilterCategory::DisasterMedical);
            }
            if v.humanitarian {
                push(FilterCategory::DisasterHumanitarian);
            }
        }
        if v.positive {
            push(FilterCategory::Positive);
        }
    }
    Ok(FilterOutcome { sets })
}

/// Curated account handles, matched case-insensitively. A leading `@` is
/// ignored.
#[derive(Debug, Clone, Default)]
pub struct AccountList {
    handles: HashSet<String>,
}

impl AccountList {
    pub fn parse(text: &str) -> Self {
        data_lines(text).map(|l| l.to_string()).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn contains(&self, handle: &str) -> bool {
        self.handles.contains(&canonical_handle(handle))
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }
}

fn canonical_handle(h: &str) -> String {
    h.trim().trim_start_matches('@').to_lowercase()
}

impl<S: AsRef<str>> FromIterator<S> for AccountList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self {
            handles: iter.into_iter().map(|h| canonical_handle(h.as_ref())).filter(|h| !h.is_empty()).collect(),
        }
    }
}

/// Messages written by a listed account. The set is tagged as disaster
/// related so it can be merged with the classifier's disaster set.
pub fn flag_known_accounts(msgs: &[RawMessage], accounts: &AccountList) -> FilteredSet {
    FilteredSet {
        category: FilterCategory::Disaster,
        message_ids: msgs.iter().filter(|m| accounts.contains(&m.author)).map(|m| m.id.clone()).collect(),
        source: Source::KnownAccount,
    }
}

/// `positive` out of `total` messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositiveShare {
    pub positive: u64,
    pub total: u64,
}

impl PositiveShare {
    pub fn new(positive: u64, total: u64) -> Self {
        Self { positive, total }
    }

    /// `round(100 * positive / total, 1)`; `None` for an empty set.
    pub fn percent(&self) -> Option<f64> {
        if self.total == 0 {
            return None;
        }
        // integer rounding, half away from zero, avoids binary artefacts
        let tenths = (2000 * self.positive + self.total) / (2 * self.total);
        Some(tenths as f64 / 10.0)
    }
}

impl fmt::Display for PositiveShare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{p:.1}%"),
            None => f.write_str("n/a"),
        }
    }
}

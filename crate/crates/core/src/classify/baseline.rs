//! Lexicon baseline classifiers. Pure functions of `(doc, lexicon)`.

use std::collections::BTreeMap;

use super::filter::{FilterItem, MessageClassifier, Source, Verdict};
use super::{Category, ClassScores, ClassifyError, Indicator, Lexicon, LexiconSet};
use crate::text::TokenizedDoc;

/// Default token fraction needed for a category match.
pub const DEFAULT_BINARY_THRESHOLD: f64 = 0.05;

fn expect(lex: &Lexicon, indicator: Indicator) -> Result<(), ClassifyError> {
    if lex.indicator() == indicator {
        Ok(())
    } else {
        Err(ClassifyError::LexiconMissing(indicator.to_string()))
    }
}

/// Positive/negative hit counting.
///
/// Scores are `(n + 1, 1, p + 1)` over `(negative, neutral, positive)`,
/// normalized. The dominant label is positive when `p > n`, negative when
/// `n > p` and neutral otherwise, so balanced evidence reads as neutral even
/// though neutral then carries the smallest score.
pub fn classify_sentiment(doc: &TokenizedDoc, lexicon: &Lexicon) -> Result<ClassScores, ClassifyError> {
    expect(lexicon, Indicator::Sentiment)?;
    let hits = lexicon.hits(doc);
    let (neg, pos) = (hits[0], hits[2]);
    let dominant = if pos > neg {
        "positive"
    } else if neg > pos {
        "negative"
    } else {
        "neutral"
    };
    Ok(ClassScores::softened(Indicator::Sentiment, &[neg, 0.0, pos]).with_dominant(dominant))
}

/// Fraction of tokens found in the category lexicon, and whether it reaches
/// `threshold`. An empty document scores zero.
pub fn classify_binary(
    doc: &TokenizedDoc,
    category: Category,
    lexicon: &Lexicon,
    threshold: f64,
) -> Result<(bool, f64), ClassifyError> {
    expect(lexicon, Indicator::Binary(category))?;
    if doc.tokens.is_empty() {
        return Ok((false, 0.0));
    }
    let hits = doc.tokens.iter().filter(|t| lexicon.contains(t)).count();
    let score = hits as f64 / doc.tokens.len() as f64;
    Ok((score >= threshold, score))
}

/// One softened-count distribution per behavioral indicator.
pub fn behavioral_profile(
    doc: &TokenizedDoc,
    lexicons: &LexiconSet,
) -> Result<BTreeMap<Indicator, ClassScores>, ClassifyError> {
    Indicator::BEHAVIORAL
        .iter()
        .map(|&ind| {
            let lex = lexicons.get(ind)?;
            Ok((ind, ClassScores::softened(ind, &lex.hits(doc))))
        })
        .collect()
}

/// Softened-count distribution over the six disaster phases.
pub fn phase_categorize(doc: &TokenizedDoc, lexicon: &Lexicon) -> Result<ClassScores, ClassifyError> {
    expect(lexicon, Indicator::Phase)?;
    Ok(ClassScores::softened(Indicator::Phase, &lexicon.hits(doc)))
}

/// Keyword-score filtering with the bundled or user-supplied lexicons.
#[derive(Debug, Clone)]
pub struct BaselineClassifier {
    pub lexicons: LexiconSet,
    pub threshold: f64,
}

impl Default for BaselineClassifier {
    fn default() -> Self {
        Self {
            lexicons: LexiconSet::bundled(),
            threshold: DEFAULT_BINARY_THRESHOLD,
        }
    }
}

impl BaselineClassifier {
    pub fn verdict(&self, doc: &TokenizedDoc) -> Result<Verdict, ClassifyError> {
        let bin = |c: Category| -> Result<bool, ClassifyError> {
            let lex = self.lexicons.get(Indicator::Binary(c))?;
            Ok(classify_binary(doc, c, lex, self.threshold)?.0)
        };
        let sentiment = classify_sentiment(doc, self.lexicons.get(Indicator::Sentiment)?)?;
        Ok(Verdict {
            disaster: bin(Category::Disaster)?,
            medical: bin(Category::Medical)?,
            humanitarian: bin(Category::Humanitarian)?,
            positive: sentiment.dominant() == "positive",
        })
    }
}

impl MessageClassifier for BaselineClassifier {
    fn source(&self) -> Source {
        Source::Baseline
    }

    fn verdicts(&self, items: &[FilterItem<'_>]) -> Result<Vec<Verdict>, ClassifyError> {
        items.iter().map(|it| self.verdict(it.doc)).collect()
    }
}

//! Run report assembled from stage artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts as a;
use super::config::PipelineConfig;
use super::stages::{load_filtered, load_messages, ClimateDiagnostics};
use super::TOOL_VERSION;
use crate::align::AlignedFrame;
use crate::classify::{FilterCategory, PositiveShare, Source};

type Error = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryLine {
    pub category: String,
    pub messages: u64,
    pub positive: u64,
    pub positive_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownAccounts {
    pub flagged: usize,
    /// Flagged messages the classifier did not mark as disaster related.
    pub missed_by_classifier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLine {
    pub topic: usize,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSummary {
    pub buckets: usize,
    pub dropped: usize,
    pub first: Option<String>,
    pub last: Option<String>,
    pub series: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationLine {
    pub a: String,
    pub b: String,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub messages: u64,
    pub classifier: Source,
    pub all_messages: CategoryLine,
    pub categories: Vec<CategoryLine>,
    pub known_accounts: KnownAccounts,
    pub topic_corpus: usize,
    pub topics: Option<Vec<TopicLine>>,
    pub term_frequencies: Vec<(String, u64)>,
    pub bigrams: Vec<(String, u64)>,
    /// Indicator → label → number of messages with that dominant label.
    pub behavior: Option<BTreeMap<String, BTreeMap<String, u64>>>,
    pub climate: Option<ClimateDiagnostics>,
    pub aligned: Option<AlignedSummary>,
    pub correlations: Vec<CorrelationLine>,
}

/// `27096` → `27,096`.
pub fn thousands(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn line(category: &str, share: PositiveShare) -> CategoryLine {
    CategoryLine {
        category: category.to_string(),
        messages: share.total,
        positive: share.positive,
        positive_pct: share.percent(),
    }
}

fn read_csv(path: &Path) -> Result<Option<Vec<csv::StringRecord>>, Error> {
    if !path.exists() {
        return Ok(None);
    }
    let mut r = csv::Reader::from_path(path)?;
    Ok(Some(r.records().collect::<Result<_, _>>()?))
}

fn counts(path: &Path) -> Result<Vec<(String, u64)>, Error> {
    read_csv(path)?
        .unwrap_or_default()
        .iter()
        .map(|r| Ok((r[0].to_string(), r[1].parse()?)))
        .collect()
}

pub(super) fn build_report(cfg: &PipelineConfig) -> Result<RunReport, Error> {
    let out = |n: &str| cfg.out.join(n);
    let msgs = load_messages(cfg)?;
    let filtered = load_filtered(cfg)?;
    let outcome = filtered.outcome();
    let n = msgs.len() as u64;

    let positive = outcome.get(FilterCategory::Positive).len() as u64;
    let categories = [FilterCategory::Disaster, FilterCategory::DisasterMedical, FilterCategory::DisasterHumanitarian]
        .iter()
        .map(|&c| line(c.name(), outcome.positive_share(c)))
        .collect();
    let disaster = outcome.get(FilterCategory::Disaster);
    let known = &filtered.known_accounts;

    let topics = read_csv(&out(a::TOPICS))?.map(|rows| {
        let mut by: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for r in rows {
            by.entry(r[0].parse().unwrap_or(0)).or_default().push(r[2].to_string());
        }
        by.into_iter().map(|(topic, terms)| TopicLine { topic, terms }).collect()
    });

    let behavior = read_csv(&out(a::BEHAVIOR))?.map(|rows| {
        let header = csv::Reader::from_path(out(a::BEHAVIOR)).ok().and_then(|mut r| r.headers().ok().cloned());
        let mut m: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        if let Some(h) = header {
            for r in &rows {
                for (ind, label) in h.iter().zip(r.iter()).skip(1) {
                    *m.entry(ind.to_string()).or_default().entry(label.to_string()).or_default() += 1;
                }
            }
        }
        m
    });

    let climate = match fs::read_to_string(out(a::CLIMATE_DIAGNOSTICS)) {
        Ok(t) => Some(serde_json::from_str(&t)?),
        Err(_) => None,
    };

    let aligned = match fs::read_to_string(out(a::ALIGNED)) {
        Ok(t) => {
            let f = AlignedFrame::from_csv(&t)?;
            let dropped = match fs::read_to_string(out(a::ALIGNED_JSON)) {
                Ok(j) => serde_json::from_str::<serde_json::Value>(&j)?["dropped"].as_u64().unwrap_or(0) as usize,
                Err(_) => 0,
            };
            let iso = |t: &chrono::DateTime<chrono::Utc>| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            Some(AlignedSummary {
                buckets: f.len(),
                dropped,
                first: f.timestamps.first().map(iso),
                last: f.timestamps.last().map(iso),
                series: f.series.iter().map(|s| s.0.clone()).collect(),
            })
        }
        Err(_) => None,
    };

    let correlations = read_csv(&out(a::CORRELATIONS))?
        .unwrap_or_default()
        .iter()
        .map(|r| {
            Ok(CorrelationLine {
                a: r[0].to_string(),
                b: r[1].to_string(),
                r: if r[2].is_empty() { None } else { Some(r[2].parse()?) },
            })
        })
        .collect::<Result<_, Error>>()?;

    Ok(RunReport {
        tool: TOOL_VERSION.to_string(),
        messages: n,
        classifier: disaster.source,
        all_messages: line("all", PositiveShare::new(positive, n)),
        categories,
        known_accounts: KnownAccounts {
            flagged: known.len(),
            missed_by_classifier: known.message_ids.iter().filter(|id| !disaster.contains(id)).count(),
        },
        topic_corpus: filtered.topic_ids().len(),
        topics,
        term_frequencies: counts(&out(a::TERM_FREQUENCIES))?.into_iter().take(10).collect(),
        bigrams: counts(&out(a::BIGRAMS))?,
        behavior,
        climate,
        aligned,
        correlations,
    })
}

fn share_sentence(l: &CategoryLine, noun: &str) -> String {
    let pct = PositiveShare::new(l.positive, l.messages);
    format!(
        "identified {} positive messages out of the {} {noun} ({pct})",
        thousands(l.positive),
        thousands(l.messages)
    )
}

impl RunReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let source = match self.classifier {
            Source::Baseline => "lexicon baseline",
            Source::Remote => "remote classifier",
            Source::KnownAccount => "known accounts",
        };
        writeln!(s, "{}", self.tool).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "== messages ==").unwrap();
        writeln!(s, "{} messages ingested, classified with the {source}", thousands(self.messages)).unwrap();
        writeln!(s, "{}", share_sentence(&self.all_messages, "messages")).unwrap();
        for c in &self.categories {
            let noun = match c.category.as_str() {
                "disaster" => "disaster-related messages".to_string(),
                other => format!("{} messages", other.replace('_', "/")),
            };
            writeln!(s, "  {:<22} {:>7}   {}", c.category, thousands(c.messages), share_sentence(c, &noun)).unwrap();
        }
        writeln!(s).unwrap();
        writeln!(s, "== known accounts ==").unwrap();
        writeln!(
            s,
            "{} messages from listed accounts, {} of them not flagged by the classifier",
            self.known_accounts.flagged, self.known_accounts.missed_by_classifier
        )
        .unwrap();
        writeln!(s, "topic corpus (disaster-related or from listed accounts): {} messages", self.topic_corpus).unwrap();
        writeln!(s).unwrap();

        writeln!(s, "== topics ==").unwrap();
        match &self.topics {
            Some(ts) => {
                for t in ts {
                    writeln!(s, "  topic {:>2}: {}", t.topic, t.terms.join(", ")).unwrap();
                }
            }
            None => writeln!(s, "  (not run)").unwrap(),
        }
        writeln!(s).unwrap();
        writeln!(s, "== most frequent terms ==").unwrap();
        for (t, c) in &self.term_frequencies {
            writeln!(s, "  {t:<20} {c:>6}").unwrap();
        }
        writeln!(s).unwrap();
        writeln!(s, "== key bigrams ==").unwrap();
        for (b, c) in &self.bigrams {
            writeln!(s, "  {b:<30} {c:>6}").unwrap();
        }
        writeln!(s).unwrap();

        writeln!(s, "== behavior (dominant label counts) ==").unwrap();
        match &self.behavior {
            Some(b) => {
                for (ind, labels) in b {
                    let parts: Vec<String> = labels.iter().map(|(l, c)| format!("{l} {c}")).collect();
                    writeln!(s, "  {ind:<10} {}", parts.join(", ")).unwrap();
                }
            }
            None => writeln!(s, "  (not run)").unwrap(),
        }
        writeln!(s).unwrap();

        writeln!(s, "== climate ==").unwrap();
        match &self.climate {
            Some(c) => writeln!(
                s,
                "  {} reports ({} skipped), {} rows from stations {}; {} duplicates, {} undated, {} malformed groups, {} out-of-range values",
                c.reports,
                c.skipped_messages,
                c.rows,
                c.stations.join(" "),
                c.duplicates,
                c.undated,
                c.malformed_groups,
                c.out_of_range
            )
            .unwrap(),
            None => writeln!(s, "  (not run)").unwrap(),
        }
        writeln!(s).unwrap();
        writeln!(s, "== aligned frame ==").unwrap();
        match &self.aligned {
            Some(f) => {
                writeln!(
                    s,
                    "  {} buckets from {} to {}, {} dropped for missing values",
                    f.buckets,
                    f.first.as_deref().unwrap_or("-"),
                    f.last.as_deref().unwrap_or("-"),
                    f.dropped
                )
                .unwrap();
                writeln!(s, "  series: {}", f.series.join(", ")).unwrap();
            }
            None => writeln!(s, "  (not run)").unwrap(),
        }
        writeln!(s).unwrap();
        writeln!(s, "== correlations (Pearson r) ==").unwrap();
        for c in &self.correlations {
            let r = c.r.map(|r| format!("{r:+.3}")).unwrap_or_else(|| "n/a".into());
            writeln!(s, "  {:<18} {:<14} {r}", c.a, c.b).unwrap();
        }
        s
    }
}

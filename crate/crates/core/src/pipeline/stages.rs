use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::artifacts as a;
use super::config::{ClassifierMode, CorpusVariant, PipelineConfig, REMOTE_ENV};
use super::report::build_report;
use super::{StageOutcome, StageResult};
use crate::align::{align_frames, bucket_activity, correlation_table, emit_plot_data, emit_plot_json, StationAgg};
use crate::classify::remote::WithFallback;
use crate::classify::{
    behavioral_profile, filter_pipeline, flag_known_accounts, phase_categorize, AccountList, BaselineClassifier,
    FilterCategory, FilterItem, FilterOutcome, FilteredSet, Indicator, LexiconSet, MessageClassifier,
    RemoteClassifier, Source,
};
use crate::corpus::{build_dictionary, key_bigrams, term_frequencies, tfidf_corpus, to_bow, Dictionary};
use crate::lda::{train_lda, LdaModel};
use crate::synop::{observations_frame, parse_bulletin_with, ClimateFrame, ParseOptions};
use crate::text::{read_messages, write_messages, Preprocessor, RawMessage, Stopwords, TokenizedDoc};

pub(super) const TERM_TOP: usize = 50;

fn out(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub(super) fn load_messages(cfg: &PipelineConfig) -> Result<Vec<RawMessage>, crate::text::IngestError> {
    read_messages(out(cfg, a::MESSAGES))
}

pub(super) fn load_docs(cfg: &PipelineConfig) -> Result<Vec<TokenizedDoc>, Box<dyn std::error::Error + Send + Sync>> {
    let f = BufReader::new(File::open(out(cfg, a::DOCS))?);
    let mut docs = Vec::new();
    for line in f.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            docs.push(serde_json::from_str(&line)?);
        }
    }
    Ok(docs)
}

/// `filtered.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct FilterArtifact {
    pub sets: BTreeMap<FilterCategory, FilteredSet>,
    pub known_accounts: FilteredSet,
}

impl FilterArtifact {
    pub fn outcome(&self) -> FilterOutcome {
        FilterOutcome { sets: self.sets.clone() }
    }

    /// Ids in the classifier's disaster set or posted by a known account.
    pub fn topic_ids(&self) -> HashSet<&str> {
        self.sets[&FilterCategory::Disaster]
            .message_ids
            .iter()
            .chain(&self.known_accounts.message_ids)
            .map(String::as_str)
            .collect()
    }
}

pub(super) fn load_filtered(cfg: &PipelineConfig) -> Result<FilterArtifact, Box<dyn std::error::Error + Send + Sync>> {
    Ok(serde_json::from_str(&fs::read_to_string(out(cfg, a::FILTERED))?)?)
}

fn topic_docs<'d>(docs: &'d [TokenizedDoc], f: &FilterArtifact) -> Vec<&'d TokenizedDoc> {
    let ids = f.topic_ids();
    docs.iter().filter(|d| ids.contains(d.message_id.as_str())).collect()
}

pub(super) fn ingest(cfg: &PipelineConfig) -> StageResult {
    let path = cfg.messages.as_ref().ok_or("no messages input configured")?;
    let msgs = read_messages(path)?;
    let mut w = create(&out(cfg, a::MESSAGES))?;
    write_messages(&mut w, &msgs)?;
    w.flush()?;

    let pre = Preprocessor {
        stopwords: match &cfg.stopwords {
            Some(p) => Stopwords::parse(&fs::read_to_string(p)?),
            None => Stopwords::english(),
        },
        ..Preprocessor::default()
    };
    let mut docs: Vec<TokenizedDoc> = msgs.iter().map(|m| pre.document(m)).collect();
    let dict = build_dictionary(&docs, cfg.dictionary)?;
    dict.write_tsv(create(&out(cfg, a::DICTIONARY))?)?;
    let mut w = create(&out(cfg, a::DOCS))?;
    for d in &mut docs {
        dict.attach(d);
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(StageOutcome::Done)
}

pub(super) fn filter(cfg: &PipelineConfig) -> StageResult {
    let msgs = load_messages(cfg)?;
    let docs = load_docs(cfg)?;
    if msgs.len() != docs.len() || msgs.iter().zip(&docs).any(|(m, d)| m.id != d.message_id) {
        return Err(format!("{} and {} are out of step; re-run ingest", a::MESSAGES, a::DOCS).into());
    }
    let items: Vec<FilterItem> =
        msgs.iter().zip(&docs).map(|(m, d)| FilterItem { id: &m.id, text: &m.text, doc: d }).collect();

    let baseline = BaselineClassifier {
        lexicons: lexicons(cfg)?,
        threshold: cfg.threshold,
    };
    let mode = cfg.classifier.clone().with_env_override(std::env::var(REMOTE_ENV).ok());
    let outcome = match mode {
        ClassifierMode::Baseline => filter_pipeline(&items, &baseline)?,
        ClassifierMode::Remote { url, fallback: false } => filter_pipeline(&items, &RemoteClassifier::new(url))?,
        ClassifierMode::Remote { url, fallback: true } => {
            let (verdicts, source) = WithFallback { remote: RemoteClassifier::new(url), local: baseline }.classify(&items)?;
            filter_pipeline(&items, &Precomputed { verdicts, source })?
        }
    };
    let known = match &cfg.accounts {
        Some(p) => flag_known_accounts(&msgs, &AccountList::load(p)?),
        None => flag_known_accounts(&msgs, &AccountList::default()),
    };
    let artifact = FilterArtifact { sets: outcome.sets, known_accounts: known };
    fs::write(out(cfg, a::FILTERED), serde_json::to_string_pretty(&artifact)? + "\n")?;
    Ok(StageOutcome::Done)
}

/// Verdicts already obtained, replayed through [`filter_pipeline`].
struct Precomputed {
    verdicts: Vec<crate::classify::Verdict>,
    source: Source,
}

impl MessageClassifier for Precomputed {
    fn source(&self) -> Source {
        self.source
    }

    fn verdicts(&self, _: &[FilterItem<'_>]) -> Result<Vec<crate::classify::Verdict>, crate::classify::ClassifyError> {
        Ok(self.verdicts.clone())
    }
}

fn lexicons(cfg: &PipelineConfig) -> Result<LexiconSet, crate::classify::ClassifyError> {
    match &cfg.lexicons {
        Some(dir) => LexiconSet::load_dir(dir),
        None => Ok(LexiconSet::bundled()),
    }
}

pub(super) fn topics(cfg: &PipelineConfig) -> StageResult {
    let docs = load_docs(cfg)?;
    let filtered = load_filtered(cfg)?;
    let dict = Dictionary::read_tsv(BufReader::new(File::open(out(cfg, a::DICTIONARY))?))?;
    let subset: Vec<TokenizedDoc> = topic_docs(&docs, &filtered).into_iter().cloned().collect();

    let mut w = csv::Writer::from_path(out(cfg, a::TERM_FREQUENCIES))?;
    w.write_record(["term", "count"])?;
    for (t, c) in term_frequencies(&subset, TERM_TOP) {
        w.write_record([t, c.to_string()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out(cfg, a::BIGRAMS))?;
    w.write_record(["bigram", "count"])?;
    for (b, c) in key_bigrams(&subset, cfg.bigram_min, cfg.bigram_top) {
        w.write_record([b.to_string(), c.to_string()])?;
    }
    w.flush()?;

    if !cfg.lda_enabled {
        return Ok(StageOutcome::Skipped("lda disabled"));
    }
    let bows: Vec<_> = subset.iter().map(|d| to_bow(d, &dict)).collect();
    let corpus = match cfg.corpus {
        CorpusVariant::Bow => bows,
        CorpusVariant::Tfidf => tfidf_corpus(&bows, &dict),
    };
    let params = cfg.lda_params();
    let model = train_lda(&corpus, dict.len(), params)?;
    fs::write(out(cfg, a::LDA_MODEL), model.to_bytes())?;
    write_topics(cfg, &model, &dict)?;

    let mut w = csv::Writer::from_path(out(cfg, a::DOC_TOPICS))?;
    w.write_record(["message_id", "topic", "probability"])?;
    for (i, (d, bow)) in subset.iter().zip(&corpus).enumerate() {
        if bow.is_empty() {
            continue;
        }
        let t = model.infer_topic(bow, cfg.fold_iters, params.seed.wrapping_add(i as u64))?;
        w.write_record([d.message_id.clone(), t.topic_id.to_string(), t.probability.to_string()])?;
    }
    w.flush()?;
    Ok(StageOutcome::Done)
}

fn write_topics(cfg: &PipelineConfig, model: &LdaModel, dict: &Dictionary) -> StageResult {
    let mut w = csv::Writer::from_path(out(cfg, a::TOPICS))?;
    w.write_record(["topic", "rank", "term", "weight"])?;
    for t in 0..model.topics() {
        for (rank, (id, p)) in model.top_terms(t, cfg.top_terms)?.into_iter().enumerate() {
            let term = dict.token(id).ok_or("model and dictionary disagree")?;
            w.write_record([t.to_string(), (rank + 1).to_string(), term.to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    Ok(StageOutcome::Done)
}

#[derive(Serialize)]
struct ScoreLine<'a> {
    message_id: &'a str,
    scores: BTreeMap<String, BTreeMap<String, f64>>,
}

pub(super) fn behave(cfg: &PipelineConfig) -> StageResult {
    let docs = load_docs(cfg)?;
    let filtered = load_filtered(cfg)?;
    let lex = lexicons(cfg)?;
    let phase_lex = lex.get(Indicator::Phase)?;

    let mut table = csv::Writer::from_path(out(cfg, a::BEHAVIOR))?;
    let mut header = vec!["message_id".to_string()];
    header.extend(Indicator::BEHAVIORAL.iter().map(|i| i.to_string()));
    header.push(Indicator::Phase.to_string());
    table.write_record(&header)?;
    let mut scores = create(&out(cfg, a::BEHAVIOR_SCORES))?;
    for d in topic_docs(&docs, &filtered) {
        let mut profile = behavioral_profile(d, &lex)?;
        profile.insert(Indicator::Phase, phase_categorize(d, phase_lex)?);
        let mut row = vec![d.message_id.clone()];
        row.extend(profile.values().map(|s| s.dominant().to_string()));
        table.write_record(&row)?;
        let line = ScoreLine {
            message_id: &d.message_id,
            scores: profile.iter().map(|(i, s)| (i.to_string(), s.to_map())).collect(),
        };
        serde_json::to_writer(&mut scores, &line)?;
        scores.write_all(b"\n")?;
    }
    table.flush()?;
    scores.flush()?;
    Ok(StageOutcome::Done)
}

/// `climate_diagnostics.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClimateDiagnostics {
    pub reports: usize,
    pub skipped_messages: usize,
    pub rows: usize,
    pub stations: Vec<String>,
    pub duplicates: usize,
    pub undated: usize,
    pub malformed_groups: usize,
    pub out_of_range: usize,
}

pub(super) fn synop(cfg: &PipelineConfig) -> StageResult {
    let Some(path) = &cfg.synop else {
        return Ok(StageOutcome::Skipped("no synop input"));
    };
    let opts = ParseOptions { reference_month: cfg.reference_month };
    let bulletin = parse_bulletin_with(&fs::read_to_string(path)?, &opts)?;
    let mut frame = observations_frame(&bulletin.reports);
    if !cfg.stations.is_empty() {
        frame = frame.restrict(&cfg.stations);
    }
    frame.write_csv(create(&out(cfg, a::CLIMATE))?)?;
    let d = frame.diagnostics;
    let diag = ClimateDiagnostics {
        reports: bulletin.reports.len(),
        skipped_messages: bulletin.skipped,
        rows: frame.len(),
        stations: frame.stations.iter().cloned().collect(),
        duplicates: d.duplicates,
        undated: d.undated,
        malformed_groups: d.malformed_groups,
        out_of_range: d.out_of_range,
    };
    fs::write(out(cfg, a::CLIMATE_DIAGNOSTICS), serde_json::to_string_pretty(&diag)? + "\n")?;
    Ok(StageOutcome::Done)
}

pub(super) fn align(cfg: &PipelineConfig) -> StageResult {
    if cfg.synop.is_none() && !out(cfg, a::CLIMATE).exists() {
        return Ok(StageOutcome::Skipped("no climate data"));
    }
    let msgs = load_messages(cfg)?;
    let filtered = load_filtered(cfg)?;
    let mut climate = ClimateFrame::read_csv(File::open(out(cfg, a::CLIMATE))?)?;
    if !cfg.stations.is_empty() {
        climate = climate.restrict(&cfg.stations);
    }
    let labels: HashMap<String, String> = filtered.sets[&FilterCategory::Positive]
        .message_ids
        .iter()
        .map(|id| (id.clone(), "positive".to_string()))
        .collect();
    let activity = bucket_activity(&msgs, &labels, cfg.bucket);

    let mut w = csv::Writer::from_path(out(cfg, a::ACTIVITY))?;
    w.write_record(["bucket_start", "total", "positive"])?;
    for p in &activity.points {
        let pos = p.labels.get("positive").copied().unwrap_or(0);
        w.write_record([p.start.to_rfc3339_opts(chrono::SecondsFormat::Secs, true), p.total.to_string(), pos.to_string()])?;
    }
    w.flush()?;

    let frame = align_frames(&activity, &climate, &cfg.variables, StationAgg::Mean)?;
    fs::write(out(cfg, a::ALIGNED), emit_plot_data(&frame)?)?;
    fs::write(out(cfg, a::ALIGNED_JSON), emit_plot_json(&frame)? + "\n")?;
    let mut w = csv::Writer::from_path(out(cfg, a::CORRELATIONS))?;
    w.write_record(["series_a", "series_b", "pearson_r"])?;
    for (x, y, r) in correlation_table(&frame) {
        w.write_record([x, y, r.map(|r| r.to_string()).unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(StageOutcome::Done)
}

pub(super) fn report(cfg: &PipelineConfig) -> StageResult {
    let r = build_report(cfg)?;
    fs::write(out(cfg, a::REPORT), r.render())?;
    fs::write(out(cfg, a::REPORT_JSON), serde_json::to_string_pretty(&r)? + "\n")?;
    Ok(StageOutcome::Done)
}

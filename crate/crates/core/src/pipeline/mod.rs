//! End-to-end runs: ingest → preprocess → dictionary → filter → topics →
//! behavior → SYNOP decode → align → report.
//!
//! Every stage reads its inputs from the configuration or from artifacts of
//! earlier stages in the output directory, so any stage can be re-run on
//! its own. Each invocation rewrites `MANIFEST` with the tool version, a
//! config hash, input and artifact digests, and the stage outcomes.

mod config;
mod report;
mod stages;

pub use config::{ClassifierMode, CorpusVariant, PipelineConfig, REMOTE_ENV};
pub use report::{AlignedSummary, CategoryLine, CorrelationLine, KnownAccounts, RunReport, TopicLine};
pub use stages::ClimateDiagnostics;

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("crisis-pulse ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST: &str = "MANIFEST";

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const MESSAGES: &str = "messages.jsonl";
    pub const DOCS: &str = "docs.jsonl";
    pub const DICTIONARY: &str = "dictionary.tsv";
    pub const FILTERED: &str = "filtered.json";
    pub const TERM_FREQUENCIES: &str = "term_frequencies.csv";
    pub const BIGRAMS: &str = "bigrams.csv";
    pub const LDA_MODEL: &str = "lda_model.txt";
    pub const TOPICS: &str = "topics.csv";
    pub const DOC_TOPICS: &str = "doc_topics.csv";
    pub const BEHAVIOR: &str = "behavior.csv";
    pub const BEHAVIOR_SCORES: &str = "behavior_scores.jsonl";
    pub const CLIMATE: &str = "climate.csv";
    pub const CLIMATE_DIAGNOSTICS: &str = "climate_diagnostics.json";
    pub const ACTIVITY: &str = "activity.csv";
    pub const ALIGNED: &str = "aligned.csv";
    pub const ALIGNED_JSON: &str = "aligned.json";
    pub const CORRELATIONS: &str = "correlations.csv";
    pub const REPORT: &str = "report.txt";
    pub const REPORT_JSON: &str = "report.json";
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage {stage}: {message}")]
    Stage { stage: Stage, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Filter,
    Topics,
    Behave,
    Synop,
    Align,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Filter,
        Stage::Topics,
        Stage::Behave,
        Stage::Synop,
        Stage::Align,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Filter => "filter",
            Stage::Topics => "topics",
            Stage::Behave => "behave",
            Stage::Synop => "synop",
            Stage::Align => "align",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageOutcome {
    Done,
    /// Not applicable to this configuration (e.g. no SYNOP input).
    Skipped(&'static str),
    Failed(String),
}

type StageResult = Result<StageOutcome, Box<dyn std::error::Error + Send + Sync>>;

fn run_stage(stage: Stage, cfg: &PipelineConfig) -> StageResult {
    match stage {
        Stage::Ingest => stages::ingest(cfg),
        Stage::Filter => stages::filter(cfg),
        Stage::Topics => stages::topics(cfg),
        Stage::Behave => stages::behave(cfg),
        Stage::Synop => stages::synop(cfg),
        Stage::Align => stages::align(cfg),
        Stage::Report => stages::report(cfg),
    }
}

/// Runs `which` in pipeline order and writes the manifest, also when a
/// stage fails. Artifacts of completed stages are kept.
pub fn run_stages(cfg: &PipelineConfig, which: &[Stage]) -> Result<Vec<(Stage, StageOutcome)>, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let mut order = which.to_vec();
    order.sort();
    order.dedup();
    let mut outcomes = Vec::new();
    let mut failure = None;
    for stage in order {
        log::info!("stage {stage}");
        match run_stage(stage, cfg) {
            Ok(o) => outcomes.push((stage, o)),
            Err(e) => {
                outcomes.push((stage, StageOutcome::Failed(e.to_string())));
                failure = Some(PipelineError::Stage { stage, message: e.to_string() });
                break;
            }
        }
    }
    write_manifest(cfg, &outcomes)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outcomes),
    }
}

/// The full pipeline.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    run_stages(cfg, &Stage::ALL)?;
    let text = fs::read_to_string(cfg.out.join(artifacts::REPORT_JSON))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Stage { stage: Stage::Report, message: e.to_string() })
}

fn sha256_file(path: &Path) -> io::Result<String> {
    let mut h = Sha256::new();
    io::copy(&mut fs::File::open(path)?, &mut h)?;
    Ok(hex::encode(h.finalize()))
}

/// Digest of a file, or of every file below a directory in path order.
fn digest(path: &Path) -> io::Result<String> {
    if !path.is_dir() {
        return sha256_file(path);
    }
    let mut files: Vec<_> = fs::read_dir(path)?.filter_map(Result::ok).map(|e| e.path()).collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files.iter().filter(|f| f.is_file()) {
        h.update(f.file_name().unwrap().to_string_lossy().as_bytes());
        h.update(sha256_file(f)?);
    }
    Ok(hex::encode(h.finalize()))
}

fn write_manifest(cfg: &PipelineConfig, outcomes: &[(Stage, StageOutcome)]) -> Result<(), PipelineError> {
    let complete = outcomes.iter().all(|(_, o)| !matches!(o, StageOutcome::Failed(_)));
    let mut m = String::new();
    m.push_str(&format!("tool\t{TOOL_VERSION}\n"));
    m.push_str(&format!("status\t{}\n", if complete { "complete" } else { "incomplete" }));
    m.push_str(&format!("config_sha256\t{}\n", cfg.hash()));
    for (k, p) in cfg.inputs() {
        m.push_str(&format!("input\t{k}\t{}\n", digest(p)?));
    }
    for (s, o) in outcomes {
        let line = match o {
            StageOutcome::Done => "done".to_string(),
            StageOutcome::Skipped(why) => format!("skipped\t{why}"),
            StageOutcome::Failed(e) => format!("failed\t{}", e.replace(['\n', '\t'], " ")),
        };
        m.push_str(&format!("stage\t{s}\t{line}\n"));
    }
    let mut names: Vec<String> = fs::read_dir(&cfg.out)?
        .filter_map(Result::ok)
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    names.sort();
    for n in names {
        m.push_str(&format!("artifact\t{n}\t{}\n", sha256_file(&cfg.out.join(&n))?));
    }
    fs::write(cfg.out.join(MANIFEST), m)?;
    Ok(())
}

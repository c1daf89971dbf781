//! `key = value` run configuration. Relative paths resolve against the
//! config file's directory; command-line overrides are applied on top.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::align::parse_bucket;
use crate::corpus::DictionaryParams;
use crate::lda::LdaParams;
use crate::synop::ClimateVariable;

pub const REMOTE_ENV: &str = "CRISIS_PULSE_REMOTE";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifierMode {
    Baseline,
    Remote { url: String, fallback: bool },
}

impl ClassifierMode {
    /// `baseline`, `remote=URL` or `remote=URL,fallback` (`remote:URL` also
    /// accepted).
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        let s = s.trim();
        if s == "baseline" {
            return Ok(Self::Baseline);
        }
        let rest = s
            .strip_prefix("remote=")
            .or_else(|| s.strip_prefix("remote:"))
            .ok_or_else(|| PipelineError::Config(format!("unknown classifier mode {s:?}")))?;
        let (url, fallback) = match rest.strip_suffix(",fallback") {
            Some(u) => (u, true),
            None => (rest, false),
        };
        if url.is_empty() {
            return Err(PipelineError::Config("remote classifier needs a URL".into()));
        }
        Ok(Self::Remote { url: url.to_string(), fallback })
    }

    /// Applies the `CRISIS_PULSE_REMOTE` URL override to remote modes.
    pub fn with_env_override(self, env: Option<String>) -> Self {
        match (self, env.filter(|u| !u.trim().is_empty())) {
            (Self::Remote { fallback, .. }, Some(url)) => Self::Remote { url: url.trim().to_string(), fallback },
            (m, _) => m,
        }
    }
}

impl fmt::Display for ClassifierMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Baseline => f.write_str("baseline"),
            Self::Remote { url, fallback: false } => write!(f, "remote={url}"),
            Self::Remote { url, fallback: true } => write!(f, "remote={url},fallback"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusVariant {
    Bow,
    Tfidf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub messages: Option<PathBuf>,
    pub synop: Option<PathBuf>,
    pub accounts: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub dictionary: DictionaryParams,
    pub lda_enabled: bool,
    pub lda: LdaParams,
    /// Required when LDA runs.
    pub seed: Option<u64>,
    pub corpus: CorpusVariant,
    pub fold_iters: usize,
    pub top_terms: usize,
    pub bigram_min: u64,
    pub bigram_top: usize,
    pub classifier: ClassifierMode,
    pub threshold: f64,
    pub bucket: TimeDelta,
    pub variables: Vec<ClimateVariable>,
    pub stations: Vec<String>,
    /// `(year, month)` for SYNOP text without its own dates.
    pub reference_month: Option<(i32, u32)>,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            messages: None,
            synop: None,
            accounts: None,
            lexicons: None,
            stopwords: None,
            dictionary: DictionaryParams::default(),
            lda_enabled: true,
            lda: LdaParams::default(),
            seed: None,
            corpus: CorpusVariant::Bow,
            fold_iters: 50,
            top_terms: 10,
            bigram_min: 2,
            bigram_top: 20,
            classifier: ClassifierMode::Baseline,
            threshold: crate::classify::baseline::DEFAULT_BINARY_THRESHOLD,
            bucket: TimeDelta::hours(1),
            variables: ClimateVariable::ALL.to_vec(),
            stations: Vec::new(),
            reference_month: None,
            out: PathBuf::from("out"),
        }
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, PipelineError> {
    v.parse().map_err(|_| PipelineError::Config(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool, PipelineError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(PipelineError::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

impl PipelineConfig {
    /// Sets one key. Paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let v = value.trim();
        match key {
            "messages" => self.messages = Some(v.into()),
            "synop" => self.synop = Some(v.into()),
            "accounts" => self.accounts = Some(v.into()),
            "lexicons" => self.lexicons = Some(v.into()),
            "stopwords" => self.stopwords = Some(v.into()),
            "min_docs" => self.dictionary.min_docs = num(key, v)?,
            "max_frac" => self.dictionary.max_frac = num(key, v)?,
            "keep_n" => self.dictionary.keep_n = num(key, v)?,
            "lda" => self.lda_enabled = flag(key, v)?,
            "topics" => self.lda.topics = num(key, v)?,
            "alpha" => self.lda.alpha = num(key, v)?,
            "beta" => self.lda.beta = num(key, v)?,
            "iterations" => self.lda.iterations = num(key, v)?,
            "seed" => self.seed = Some(num(key, v)?),
            "corpus" => {
                self.corpus = match v {
                    "bow" => CorpusVariant::Bow,
                    "tfidf" => CorpusVariant::Tfidf,
                    _ => return Err(PipelineError::Config(format!("corpus: expected bow or tfidf, got {v:?}"))),
                }
            }
            "fold_iters" => self.fold_iters = num(key, v)?,
            "top_terms" => self.top_terms = num(key, v)?,
            "bigram_min" => self.bigram_min = num(key, v)?,
            "bigram_top" => self.bigram_top = num(key, v)?,
            "classifier" => self.classifier = ClassifierMode::parse(v)?,
            "threshold" => self.threshold = num(key, v)?,
            "bucket" => self.bucket = parse_bucket(v).map_err(|e| PipelineError::Config(e.to_string()))?,
            "variables" => {
                self.variables = list(v)
                    .iter()
                    .map(|n| n.parse().map_err(|e: crate::synop::SynopError| PipelineError::Config(e.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "stations" => self.stations = list(v),
            "reference_month" => {
                let bad = || PipelineError::Config(format!("reference_month: expected YYYY-MM, got {v:?}"));
                let (y, m) = v.split_once('-').ok_or_else(bad)?;
                let (y, m) = (y.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
                if !(1..=12).contains(&m) {
                    return Err(bad());
                }
                self.reference_month = Some((y, m));
            }
            "out" => self.out = v.into(),
            _ => return Err(PipelineError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a config file body; relative paths are joined to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut c = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key = value", n + 1)))?;
            c.set(k.trim(), v).map_err(|e| PipelineError::Config(format!("line {}: {e}", n + 1)))?;
        }
        for p in [&mut c.messages, &mut c.synop, &mut c.accounts, &mut c.lexicons, &mut c.stopwords]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if c.out.is_relative() {
            c.out = base.join(&c.out);
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks that every referenced input exists and that runs are seeded.
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (key, p) in self.inputs() {
            if !p.exists() {
                return Err(PipelineError::Config(format!("{key}: {} does not exist", p.display())));
            }
        }
        if self.lda_enabled && self.seed.is_none() {
            return Err(PipelineError::Config("seed is required when LDA is enabled".into()));
        }
        self.lda_params().validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.dictionary.max_frac) {
            return Err(PipelineError::Config(format!("max_frac = {}", self.dictionary.max_frac)));
        }
        Ok(())
    }

    pub fn lda_params(&self) -> LdaParams {
        LdaParams { seed: self.seed.unwrap_or(0), ..self.lda }
    }

    /// Input files by config key.
    pub fn inputs(&self) -> Vec<(&'static str, &Path)> {
        [
            ("messages", &self.messages),
            ("synop", &self.synop),
            ("accounts", &self.accounts),
            ("lexicons", &self.lexicons),
            ("stopwords", &self.stopwords),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.as_deref().map(|p| (k, p)))
        .collect()
    }

    /// Canonical settings, paths reduced to file names and the output
    /// directory left out, so the same inputs hash alike wherever they live.
    pub fn canonical(&self) -> BTreeMap<&'static str, String> {
        let name = |p: &Option<PathBuf>| {
            p.as_ref()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        };
        let mut m = BTreeMap::new();
        m.insert("messages", name(&self.messages));
        m.insert("synop", name(&self.synop));
        m.insert("accounts", name(&self.accounts));
        m.insert("lexicons", name(&self.lexicons));
        m.insert("stopwords", name(&self.stopwords));
        m.insert("min_docs", self.dictionary.min_docs.to_string());
        m.insert("max_frac", self.dictionary.max_frac.to_string());
        m.insert("keep_n", self.dictionary.keep_n.to_string());
        m.insert("lda", self.lda_enabled.to_string());
        m.insert("topics", self.lda.topics.to_string());
        m.insert("alpha", self.lda.alpha.to_string());
        m.insert("beta", self.lda.beta.to_string());
        m.insert("iterations", self.lda.iterations.to_string());
        m.insert("seed", self.seed.map(|s| s.to_string()).unwrap_or_default());
        m.insert("corpus", format!("{:?}", self.corpus).to_lowercase());
        m.insert("fold_iters", self.fold_iters.to_string());
        m.insert("top_terms", self.top_terms.to_string());
        m.insert("bigram_min", self.bigram_min.to_string());
        m.insert("bigram_top", self.bigram_top.to_string());
        m.insert("classifier", self.classifier.to_string());
        m.insert("threshold", self.threshold.to_string());
        m.insert("bucket", format!("{}s", self.bucket.num_seconds()));
        m.insert("variables", self.variables.iter().map(|v| v.name()).collect::<Vec<_>>().join(","));
        m.insert("stations", self.stations.join(","));
        m.insert(
            "reference_month",
            self.reference_month.map(|(y, mo)| format!("{y:04}-{mo:02}")).unwrap_or_default(),
        );
        m
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical() {
            h.update(format!("{k}={v}\n"));
        }
        hex::encode(h.finalize())
    }
}

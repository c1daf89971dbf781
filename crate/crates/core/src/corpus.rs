//! Bag-of-words dictionary, TF-IDF weighting and frequency statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use crate::text::TokenizedDoc;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("dictionary file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Document-frequency and size limits applied when building a [`Dictionary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryParams {
    /// Tokens seen in fewer documents than this are dropped.
    pub min_docs: u32,
    /// Tokens whose document fraction exceeds this are dropped.
    pub max_frac: f64,
    /// At most this many tokens are kept, highest total frequency first.
    pub keep_n: usize,
}

impl Default for DictionaryParams {
    fn default() -> Self {
        Self {
            min_docs: 15,
            max_frac: 0.5,
            keep_n: 100_000,
        }
    }
}

/// Token ↔ id map with document and corpus frequencies.
///
/// Ids are dense and ordered by total frequency (descending), ties by token.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    tokens: Vec<String>,
    token_to_id: HashMap<String, u32>,
    doc_freq: Vec<u32>,
    total_freq: Vec<u64>,
    num_docs: usize,
    params: DictionaryParams,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn params(&self) -> DictionaryParams {
        self.params
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }

    pub fn total_freq(&self, id: u32) -> u64 {
        self.total_freq[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Fills `doc.token_ids` with the ids of its in-dictionary tokens.
    pub fn attach(&self, doc: &mut TokenizedDoc) {
        doc.token_ids = doc.tokens.iter().filter_map(|t| self.id(t)).collect();
    }

    /// Writes the tab-separated form: a `#` header line carrying the corpus
    /// size and build parameters, a column header, then one row per id.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let p = self.params;
        writeln!(
            w,
            "#crisis-pulse-dictionary v1\tnum_docs={}\tmin_docs={}\tmax_frac={}\tkeep_n={}",
            self.num_docs, p.min_docs, p.max_frac, p.keep_n
        )?;
        writeln!(w, "id\ttoken\tdoc_freq\ttotal_freq")?;
        for (i, t) in self.tokens.iter().enumerate() {
            writeln!(w, "{i}\t{t}\t{}\t{}", self.doc_freq[i], self.total_freq[i])?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self, CorpusError> {
        let err = |line: usize, message: &str| CorpusError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| err(1, "missing header"))??;
        let mut fields = header.split('\t');
        if fields.next() != Some("#crisis-pulse-dictionary v1") {
            return Err(err(1, "unknown dictionary format"));
        }
        let mut kv = HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| err(1, "malformed header field"))?;
            kv.insert(k, v.to_string());
        }
        let get = |k: &str| kv.get(k).cloned().ok_or_else(|| err(1, &format!("missing {k}")));
        let num = |k: &str| -> Result<usize, CorpusError> {
            get(k)?.parse().map_err(|_| err(1, &format!("bad {k}")))
        };
        let num_docs = num("num_docs")?;
        let params = DictionaryParams {
            min_docs: num("min_docs")? as u32,
            max_frac: get("max_frac")?.parse().map_err(|_| err(1, "bad max_frac"))?,
            keep_n: num("keep_n")?,
        };
        match lines.next() {
            Some(Ok(l)) if l == "id\ttoken\tdoc_freq\ttotal_freq" => {}
            _ => return Err(err(2, "missing column header")),
        }
        let mut tokens = Vec::new();
        let mut doc_freq = Vec::new();
        let mut total_freq = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let n = i + 3;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(err(n, "expected 4 columns"));
            }
            if cols[0].parse::<usize>().ok() != Some(tokens.len()) {
                return Err(err(n, "ids must be dense and ascending"));
            }
            tokens.push(cols[1].to_string());
            doc_freq.push(cols[2].parse().map_err(|_| err(n, "bad doc_freq"))?);
            total_freq.push(cols[3].parse().map_err(|_| err(n, "bad total_freq"))?);
        }
        let token_to_id = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            tokens,
            token_to_id,
            doc_freq,
            total_freq,
            num_docs,
            params,
        })
    }
}

/// Builds the filtered dictionary.
///
/// A token survives when `doc_freq >= min_docs` and
/// `doc_freq / num_docs <= max_frac`; the survivors are ranked by total
/// frequency and cut to `keep_n`.
pub fn build_dictionary(docs: &[TokenizedDoc], params: DictionaryParams) -> Result<Dictionary, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut counts: HashMap<&str, (u32, u64)> = HashMap::new();
    for doc in docs {
        let mut seen = HashSet::new();
        for t in &doc.tokens {
            let e = counts.entry(t.as_str()).or_default();
            e.1 += 1;
            if seen.insert(t.as_str()) {
                e.0 += 1;
            }
        }
    }
    let d = docs.len() as f64;
    let mut kept: Vec<(&str, u32, u64)> = counts
        .into_iter()
        .filter(|&(_, (df, _))| df >= params.min_docs && (df as f64) / d <= params.max_frac)
        .map(|(t, (df, tf))| (t, df, tf))
        .collect();
    kept.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(b.0)));
    kept.truncate(params.keep_n);

    let mut dict = Dictionary {
        tokens: Vec::with_capacity(kept.len()),
        token_to_id: HashMap::with_capacity(kept.len()),
        doc_freq: Vec::with_capacity(kept.len()),
        total_freq: Vec::with_capacity(kept.len()),
        num_docs: docs.len(),
        params,
    };
    for (i, (t, df, tf)) in kept.into_iter().enumerate() {
        dict.tokens.push(t.to_string());
        dict.token_to_id.insert(t.to_string(), i as u32);
        dict.doc_freq.push(df);
        dict.total_freq.push(tf);
    }
    Ok(dict)
}

/// Sparse document vector, ids strictly increasing, weights positive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BowVector {
    pub entries: Vec<(u32, f64)>,
}

impl BowVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    /// Builds a vector from unsorted, possibly repeated `(id, weight)` pairs.
    /// Weights for the same id are summed; non-positive results are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (id, w) in pairs {
            *acc.entry(id).or_default() += w;
        }
        Self {
            entries: acc.into_iter().filter(|e| e.1 > 0.0).collect(),
        }
    }
}

/// Term counts of the in-dictionary tokens of `doc`.
pub fn to_bow(doc: &TokenizedDoc, dict: &Dictionary) -> BowVector {
    BowVector::from_pairs(doc.tokens.iter().filter_map(|t| dict.id(t)).map(|id| (id, 1.0)))
}

/// Reweights count vectors by `log2(num_docs / doc_freq)` and L2-normalizes
/// each document. Terms present in every document get weight zero and
/// vanish, so a document made only of such terms becomes empty.
pub fn tfidf_corpus(bows: &[BowVector], dict: &Dictionary) -> Vec<BowVector> {
    let d = dict.num_docs() as f64;
    bows.iter()
        .map(|bow| {
            let weighted: Vec<(u32, f64)> = bow
                .entries
                .iter()
                .map(|&(id, c)| (id, c * (d / dict.doc_freq(id) as f64).log2()))
                .filter(|e| e.1 > 0.0)
                .collect();
            let norm = weighted.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            BowVector {
                entries: weighted.into_iter().map(|(id, w)| (id, w / norm)).collect(),
            }
        })
        .collect()
}

fn ranked<K: Ord>(counts: HashMap<K, u64>, min_count: u64, top_n: usize) -> Vec<(K, u64)> {
    let mut v: Vec<(K, u64)> = counts.into_iter().filter(|e| e.1 >= min_count).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(top_n);
    v
}

/// Most frequent tokens, count descending then token ascending.
pub fn term_frequencies(docs: &[TokenizedDoc], top_n: usize) -> Vec<(String, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in docs.iter().flat_map(|d| &d.tokens) {
        *counts.entry(t.clone()).or_default() += 1;
    }
    ranked(counts, 1, top_n)
}

/// Two adjacent tokens within one document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bigram(pub String, pub String);

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.0, self.1)
    }
}

/// Adjacent token pairs occurring at least `min_count` times.
pub fn key_bigrams(docs: &[TokenizedDoc], min_count: u64, top_n: usize) -> Vec<(Bigram, u64)> {
    let mut counts: HashMap<Bigram, u64> = HashMap::new();
    for doc in docs {
        for w in doc.tokens.windows(2) {
            *counts.entry(Bigram(w[0].clone(), w[1].clone())).or_default() += 1;
        }
    }
    ranked(counts, min_count.max(1), top_n)
}

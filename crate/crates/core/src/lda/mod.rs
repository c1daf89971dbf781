//! Latent Dirichlet Allocation trained by collapsed Gibbs sampling.
//!
//! Works on bag-of-words or TF-IDF corpora. Real-valued weights enter the
//! count tables as weighted increments: a weight `w` becomes `floor(w)` unit
//! slots plus one slot carrying the fractional remainder, each with its own
//! latent topic.
//!
//! Training is deterministic for a fixed seed: the sampler visits slots in
//! corpus order and draws from a ChaCha8 stream.

mod gibbs;

pub use gibbs::GibbsSampler;

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::BowVector;
use gibbs::{expand, sample_index, Slot};

#[derive(Debug, thiserror::Error)]
pub enum LdaError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("token id {id} outside vocabulary of size {vocab}")]
    VocabularyMismatch { id: u32, vocab: usize },
    #[error("topic {topic} out of range (model has {topics})")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaParams {
    pub topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    /// Gibbs sweeps over the whole corpus.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            topics: 10,
            alpha: 0.1,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl LdaParams {
    pub fn validate(&self) -> Result<(), LdaError> {
        if self.topics == 0 {
            return Err(LdaError::InvalidHyperparameter("topic count must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(LdaError::InvalidHyperparameter(format!("alpha = {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LdaError::InvalidHyperparameter(format!("beta = {}", self.beta)));
        }
        Ok(())
    }
}

/// Trained topic-word distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    topics: usize,
    vocab: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterations: usize,
    /// K×V, row-major.
    phi: Vec<f64>,
}

/// Dominant topic of one document and its full mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicAssignment {
    pub topic_id: usize,
    pub probability: f64,
    pub theta: Vec<f64>,
}

/// Trains a model over a corpus indexed against a vocabulary of `vocab` ids.
pub fn train_lda(corpus: &[BowVector], vocab: usize, params: LdaParams) -> Result<LdaModel, LdaError> {
    let mut sampler = GibbsSampler::new(corpus, vocab, params)?;
    for _ in 0..params.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// Like [`train_lda`], also returning the training perplexity after each sweep.
pub fn train_lda_traced(
    corpus: &[BowVector],
    vocab: usize,
    params: LdaParams,
) -> Result<(LdaModel, Vec<f64>), LdaError> {
    let mut sampler = GibbsSampler::new(corpus, vocab, params)?;
    let mut trace = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        sampler.sweep();
        trace.push(sampler.perplexity());
    }
    Ok((sampler.into_model(), trace))
}

impl LdaModel {
    /// Builds a model from an explicit K×V row-major matrix. Rows are
    /// renormalized to sum to one.
    pub fn from_phi(rows: Vec<Vec<f64>>, params: LdaParams) -> Result<Self, LdaError> {
        params.validate()?;
        if rows.len() != params.topics || rows.is_empty() {
            return Err(LdaError::InvalidHyperparameter("phi must have one row per topic".into()));
        }
        let vocab = rows[0].len();
        let mut phi = Vec::with_capacity(rows.len() * vocab);
        for row in rows {
            let s: f64 = row.iter().sum();
            if row.len() != vocab || s <= 0.0 || row.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(LdaError::InvalidHyperparameter("phi rows must be non-negative, equal length and non-zero".into()));
            }
            phi.extend(row.iter().map(|x| x / s));
        }
        Ok(Self {
            topics: params.topics,
            vocab,
            alpha: params.alpha,
            beta: params.beta,
            seed: params.seed,
            iterations: params.iterations,
            phi,
        })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        self.phi[topic * self.vocab + word]
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.phi[topic * self.vocab..(topic + 1) * self.vocab]
    }

    /// Estimates a document's topic mixture by fold-in Gibbs sampling with
    /// `phi` held fixed. `theta` is averaged over the last half of the
    /// `fold_iters` sweeps (at least one).
    pub fn infer_topic(&self, doc: &BowVector, fold_iters: usize, seed: u64) -> Result<TopicAssignment, LdaError> {
        if let Some(&(id, _)) = doc.entries.iter().find(|e| e.0 as usize >= self.vocab) {
            return Err(LdaError::VocabularyMismatch { id, vocab: self.vocab });
        }
        let k = self.topics;
        let mut slots: Vec<Slot> = Vec::new();
        expand(0, doc, &mut slots);
        let len: f64 = slots.iter().map(|s| s.weight).sum();
        let denom = len + k as f64 * self.alpha;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z: Vec<usize> = Vec::with_capacity(slots.len());
        let mut counts = vec![0.0; k];
        for s in &slots {
            let t = rng.gen_range(0..k);
            z.push(t);
            counts[t] += s.weight;
        }

        let averaged = (fold_iters / 2).max(1);
        let burn_in = fold_iters.saturating_sub(averaged);
        let mut theta = vec![0.0; k];
        let mut probs = vec![0.0; k];
        for sweep in 0..burn_in + averaged {
            if sweep < fold_iters {
                for (i, s) in slots.iter().enumerate() {
                    counts[z[i]] = (counts[z[i]] - s.weight).max(0.0);
                    for t in 0..k {
                        probs[t] = (counts[t] + self.alpha) * self.phi(t, s.word as usize);
                    }
                    let t = sample_index(&probs, &mut rng);
                    z[i] = t;
                    counts[t] += s.weight;
                }
            }
            if sweep >= burn_in {
                for t in 0..k {
                    theta[t] += (counts[t] + self.alpha) / denom;
                }
            }
        }
        let total: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|x| *x /= total);

        let mut topic_id = 0;
        for t in 1..k {
            if theta[t] > theta[topic_id] {
                topic_id = t;
            }
        }
        Ok(TopicAssignment {
            topic_id,
            probability: theta[topic_id],
            theta,
        })
    }

    /// The `n` heaviest words of a topic, weight descending, lowest id first
    /// on ties.
    pub fn top_terms(&self, topic: usize, n: usize) -> Result<Vec<(u32, f64)>, LdaError> {
        if topic >= self.topics {
            return Err(LdaError::TopicOutOfRange { topic, topics: self.topics });
        }
        let mut terms: Vec<(u32, f64)> = self.row(topic).iter().enumerate().map(|(w, &p)| (w as u32, p)).collect();
        terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        terms.truncate(n);
        Ok(terms)
    }

    /// Per-token perplexity of `corpus`, with each document's mixture from
    /// [`infer_topic`](Self::infer_topic) seeded by `seed + doc index`.
    pub fn perplexity(&self, corpus: &[BowVector], fold_iters: usize, seed: u64) -> Result<f64, LdaError> {
        let mut loglik = 0.0;
        let mut total = 0.0;
        for (d, doc) in corpus.iter().enumerate() {
            let theta = self.infer_topic(doc, fold_iters, seed.wrapping_add(d as u64))?.theta;
            for &(w, c) in &doc.entries {
                let p: f64 = (0..self.topics).map(|t| theta[t] * self.phi(t, w as usize)).sum();
                loglik += c * p.ln();
                total += c;
            }
        }
        if total == 0.0 {
            return Err(LdaError::EmptyCorpus);
        }
        Ok((-loglik / total).exp())
    }

    /// Text form: a `#` format line, `key=value` header lines, a `phi` marker,
    /// then one space-separated row per topic. Floats are written in their
    /// shortest round-tripping form, so reading back is exact.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "#crisis-pulse-lda v1")?;
        writeln!(w, "topics={}", self.topics)?;
        writeln!(w, "vocab={}", self.vocab)?;
        writeln!(w, "alpha={:?}", self.alpha)?;
        writeln!(w, "beta={:?}", self.beta)?;
        writeln!(w, "seed={}", self.seed)?;
        writeln!(w, "iterations={}", self.iterations)?;
        writeln!(w, "phi")?;
        for t in 0..self.topics {
            let row: Vec<String> = self.row(t).iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, LdaError> {
        let err = |line: usize, message: &str| LdaError::Format {
            line,
            message: message.to_string(),
        };
        let lines: Vec<String> = r.lines().collect::<Result<_, _>>()?;
        if lines.first().map(String::as_str) != Some("#crisis-pulse-lda v1") {
            return Err(err(1, "unknown model format"));
        }
        let keys = ["topics", "vocab", "alpha", "beta", "seed", "iterations"];
        let mut vals = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            let line = lines.get(i + 1).ok_or_else(|| err(i + 2, "truncated header"))?;
            let v = line
                .strip_prefix(key)
                .and_then(|s| s.strip_prefix('='))
                .ok_or_else(|| err(i + 2, &format!("expected {key}=")))?;
            vals.push(v.to_string());
        }
        let int = |i: usize| vals[i].parse::<u64>().map_err(|_| err(i + 2, "bad integer"));
        let float = |i: usize| vals[i].parse::<f64>().map_err(|_| err(i + 2, "bad number"));
        let (topics, vocab) = (int(0)? as usize, int(1)? as usize);
        if lines.get(7).map(String::as_str) != Some("phi") {
            return Err(err(8, "expected phi marker"));
        }
        let mut phi = Vec::with_capacity(topics * vocab);
        for t in 0..topics {
            let line = lines.get(8 + t).ok_or_else(|| err(9 + t, "missing phi row"))?;
            let row: Vec<f64> = line
                .split(' ')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(9 + t, "bad phi value"))?;
            if row.len() != vocab {
                return Err(err(9 + t, "phi row length differs from vocab"));
            }
            phi.extend(row);
        }
        Ok(Self {
            topics,
            vocab,
            alpha: float(2)?,
            beta: float(3)?,
            seed: int(4)?,
            iterations: int(5)? as usize,
            phi,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bow(pairs: &[(u32, f64)]) -> BowVector {
        BowVector::from_pairs(pairs.iter().copied())
    }

    fn params(topics: usize, iterations: usize, seed: u64) -> LdaParams {
        LdaParams { topics, alpha: 0.1, beta: 0.01, iterations, seed }
    }

    #[test]
    fn single_topic_is_smoothed_unigram() {
        let corpus = vec![bow(&[(0, 3.0), (1, 1.0)]), bow(&[(2, 2.0)])];
        let m = train_lda(&corpus, 4, params(1, 20, 7)).unwrap();
        let beta = 0.01;
        let denom = 6.0 + 4.0 * beta;
        let expected = [(3.0 + beta) / denom, (1.0 + beta) / denom, (2.0 + beta) / denom, beta / denom];
        for (w, e) in expected.iter().enumerate() {
            assert!((m.phi(0, w) - e).abs() < 1e-12);
        }
        for d in &corpus {
            let a = m.infer_topic(d, 10, 1).unwrap();
            assert_eq!(a.topic_id, 0);
            assert!((a.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_model() {
        let corpus: Vec<_> = (0..30)
            .map(|d| bow(&[((d % 5) as u32, 2.0), ((d % 7) as u32 + 5, 1.0)]))
            .collect();
        let a = train_lda(&corpus, 12, params(3, 50, 42)).unwrap();
        let b = train_lda(&corpus, 12, params(3, 50, 42)).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = train_lda(&corpus, 12, params(3, 50, 43)).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn hyperparameter_and_corpus_errors() {
        let corpus = vec![bow(&[(0, 1.0)])];
        assert!(matches!(train_lda(&[], 3, params(2, 1, 0)), Err(LdaError::EmptyCorpus)));
        assert!(matches!(train_lda(&corpus, 3, params(0, 1, 0)), Err(LdaError::InvalidHyperparameter(_))));
        let bad = LdaParams { alpha: 0.0, ..params(2, 1, 0) };
        assert!(matches!(train_lda(&corpus, 3, bad), Err(LdaError::InvalidHyperparameter(_))));
        let bad = LdaParams { beta: -1.0, ..params(2, 1, 0) };
        assert!(matches!(train_lda(&corpus, 3, bad), Err(LdaError::InvalidHyperparameter(_))));
        assert!(matches!(
            train_lda(&[bow(&[(5, 1.0)])], 3, params(2, 1, 0)),
            Err(LdaError::VocabularyMismatch { id: 5, vocab: 3 })
        ));
    }

    fn delta_model() -> LdaModel {
        // topic t puts almost all its mass on words 2t and 2t+1
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|t| (0..6).map(|w| if w / 2 == t { 0.4995 } else { 0.00025 }).collect())
            .collect();
        LdaModel::from_phi(rows, params(3, 0, 0)).unwrap()
    }

    #[test]
    fn infer_examples() {
        let m = delta_model();
        let empty = m.infer_topic(&BowVector::default(), 100, 3).unwrap();
        assert_eq!(empty.topic_id, 0);
        for p in &empty.theta {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        let a = m.infer_topic(&bow(&[(4, 3.0), (5, 2.0)]), 100, 3).unwrap();
        assert_eq!(a.topic_id, 2);
        assert!((a.theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(a.probability, a.theta[2]);
        assert!(matches!(
            m.infer_topic(&bow(&[(6, 1.0)]), 10, 0),
            Err(LdaError::VocabularyMismatch { id: 6, .. })
        ));
    }

    #[test]
    fn top_terms_examples() {
        let m = delta_model();
        let all = m.top_terms(1, 6).unwrap();
        assert_eq!(all.len(), 6);
        assert!((all.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(all[0].0, 2);
        assert_eq!(all[1].0, 3);
        assert!(all.windows(2).all(|w| w[0].1 >= w[1].1));
        // ties resolved by lowest id
        assert_eq!(all[2].0, 0);
        assert!(matches!(m.top_terms(3, 1), Err(LdaError::TopicOutOfRange { topic: 3, topics: 3 })));
    }

    #[test]
    fn perplexity_examples() {
        let v = 8;
        let uniform = LdaModel::from_phi(vec![vec![1.0; v]; 2], params(2, 0, 0)).unwrap();
        let corpus = vec![bow(&[(0, 2.0), (3, 1.0)]), bow(&[(7, 4.0)])];
        let p = uniform.perplexity(&corpus, 20, 1).unwrap();
        assert!((p - v as f64).abs() < 1e-9);

        let single = LdaModel::from_phi(vec![vec![1.0]], params(1, 0, 0)).unwrap();
        let p = single.perplexity(&[bow(&[(0, 5.0)])], 20, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-12);

        assert!(matches!(uniform.perplexity(&[], 10, 0), Err(LdaError::EmptyCorpus)));
    }

    #[test]
    fn trained_beats_random_phi() {
        use rand::Rng;
        let corpus: Vec<_> = (0..60)
            .map(|d| if d % 2 == 0 { bow(&[(0, 3.0), (1, 2.0), (2, 2.0)]) } else { bow(&[(3, 3.0), (4, 2.0), (5, 2.0)]) })
            .collect();
        let trained = train_lda(&corpus, 6, params(2, 100, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rows: Vec<Vec<f64>> = (0..2).map(|_| (0..6).map(|_| rng.gen::<f64>() + 0.01).collect()).collect();
        let random = LdaModel::from_phi(rows, params(2, 0, 0)).unwrap();
        let pt = trained.perplexity(&corpus, 50, 1).unwrap();
        let pr = random.perplexity(&corpus, 50, 1).unwrap();
        assert!(pt <= pr, "trained {pt} random {pr}");
        assert!(pt >= 1.0);
    }

    #[test]
    fn weighted_slots() {
        let corpus = vec![bow(&[(0, 2.5), (1, 0.25)])];
        let s = GibbsSampler::new(&corpus, 2, params(2, 0, 0)).unwrap();
        let weights: Vec<f64> = (0..s.num_slots()).map(|i| s.slot(i).2).collect();
        assert_eq!(weights, vec![1.0, 1.0, 0.5, 0.25]);
        assert!(s.conservation_error() < 1e-12);
    }

    #[test]
    fn tfidf_corpus_trains_and_conserves() {
        let corpus: Vec<_> = (0..20)
            .map(|d| bow(&[((d % 4) as u32, 0.3 + d as f64 * 0.01), (4 + (d % 3) as u32, 0.7)]))
            .collect();
        let mut s = GibbsSampler::new(&corpus, 8, params(3, 0, 9)).unwrap();
        for _ in 0..30 {
            s.sweep();
            assert!(s.conservation_error() < 1e-9);
        }
        let m = s.into_model();
        for t in 0..3 {
            assert!((m.row(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn model_text_round_trip() {
        let corpus: Vec<_> = (0..10).map(|d| bow(&[((d % 3) as u32, 1.0 + d as f64)])).collect();
        let m = train_lda(&corpus, 5, params(2, 10, 1)).unwrap();
        let back = LdaModel::read(&m.to_bytes()[..]).unwrap();
        assert_eq!(back, m);
        assert!(LdaModel::read(&b"#crisis-pulse-lda v1\ntopics=x\n"[..]).is_err());
    }
}

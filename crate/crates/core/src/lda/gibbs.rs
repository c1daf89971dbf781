use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LdaError, LdaModel, LdaParams};
use crate::corpus::BowVector;

/// One latent assignment slot. Integer counts expand into unit-weight slots;
/// a fractional remainder (TF-IDF corpora) becomes one extra slot carrying it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slot {
    pub doc: u32,
    pub word: u32,
    pub weight: f64,
}

pub(crate) fn expand(doc: u32, bow: &BowVector, out: &mut Vec<Slot>) {
    for &(word, w) in &bow.entries {
        let whole = w.floor();
        for _ in 0..whole as u64 {
            out.push(Slot { doc, word, weight: 1.0 });
        }
        let frac = w - whole;
        if frac > 1e-12 {
            out.push(Slot { doc, word, weight: frac });
        }
    }
}

/// Draws an index with probability proportional to `weights`.
pub(crate) fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Collapsed Gibbs sampler state for LDA.
///
/// Count tables are kept as `f64` so weighted slots share the same code path
/// as unit counts.
pub struct GibbsSampler {
    params: LdaParams,
    vocab: usize,
    num_docs: usize,
    slots: Vec<Slot>,
    assignment: Vec<u32>,
    doc_topic: Vec<f64>,
    topic_word: Vec<f64>,
    topic_total: Vec<f64>,
    doc_len: Vec<f64>,
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
    sweeps: usize,
}

impl GibbsSampler {
    /// Validates inputs and assigns every slot a uniformly random topic.
    pub fn new(corpus: &[BowVector], vocab: usize, params: LdaParams) -> Result<Self, LdaError> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(LdaError::EmptyCorpus);
        }
        let k = params.topics;
        let mut slots = Vec::new();
        for (d, bow) in corpus.iter().enumerate() {
            if let Some(&(id, _)) = bow.entries.iter().find(|e| e.0 as usize >= vocab) {
                return Err(LdaError::VocabularyMismatch { id, vocab });
            }
            expand(d as u32, bow, &mut slots);
        }
        let mut s = Self {
            params,
            vocab,
            num_docs: corpus.len(),
            assignment: vec![0; slots.len()],
            doc_topic: vec![0.0; corpus.len() * k],
            topic_word: vec![0.0; k * vocab],
            topic_total: vec![0.0; k],
            doc_len: vec![0.0; corpus.len()],
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            scratch: vec![0.0; k],
            sweeps: 0,
            slots,
        };
        for i in 0..s.slots.len() {
            let t = s.rng.gen_range(0..k) as u32;
            s.assignment[i] = t;
            s.add(i, t as usize);
            s.doc_len[s.slots[i].doc as usize] += s.slots[i].weight;
        }
        Ok(s)
    }

    fn add(&mut self, i: usize, topic: usize) {
        let Slot { doc, word, weight } = self.slots[i];
        let k = self.params.topics;
        self.doc_topic[doc as usize * k + topic] += weight;
        self.topic_word[topic * self.vocab + word as usize] += weight;
        self.topic_total[topic] += weight;
    }

    fn remove(&mut self, i: usize, topic: usize) {
        let Slot { doc, word, weight } = self.slots[i];
        let k = self.params.topics;
        let dt = &mut self.doc_topic[doc as usize * k + topic];
        *dt = (*dt - weight).max(0.0);
        let tw = &mut self.topic_word[topic * self.vocab + word as usize];
        *tw = (*tw - weight).max(0.0);
        self.topic_total[topic] = (self.topic_total[topic] - weight).max(0.0);
    }

    /// Fills `scratch` with the unnormalized conditional for slot `i`, whose
    /// own counts must already be removed:
    /// `(n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)`.
    fn fill_conditional(&mut self, i: usize) {
        let Slot { doc, word, .. } = self.slots[i];
        let k = self.params.topics;
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let vbeta = self.vocab as f64 * beta;
        for t in 0..k {
            self.scratch[t] = (self.doc_topic[doc as usize * k + t] + alpha)
                * (self.topic_word[t * self.vocab + word as usize] + beta)
                / (self.topic_total[t] + vbeta);
        }
    }

    /// Normalized conditional distribution of slot `i` given all other slots.
    /// The sampler state is left unchanged.
    pub fn conditional(&mut self, i: usize) -> Vec<f64> {
        let cur = self.assignment[i] as usize;
        self.remove(i, cur);
        self.fill_conditional(i);
        self.add(i, cur);
        let total: f64 = self.scratch.iter().sum();
        self.scratch.iter().map(|p| p / total).collect()
    }

    /// Draws a topic for slot `i` from its conditional, then restores the
    /// slot's current assignment. Consumes randomness exactly like a real
    /// update, but leaves the counts untouched.
    pub fn draw_topic(&mut self, i: usize) -> usize {
        let cur = self.assignment[i] as usize;
        self.remove(i, cur);
        self.fill_conditional(i);
        let t = sample_index(&self.scratch, &mut self.rng);
        self.add(i, cur);
        t
    }

    /// One full pass resampling every slot in corpus order.
    pub fn sweep(&mut self) {
        for i in 0..self.slots.len() {
            let cur = self.assignment[i] as usize;
            self.remove(i, cur);
            self.fill_conditional(i);
            let t = sample_index(&self.scratch, &mut self.rng);
            self.assignment[i] = t as u32;
            self.add(i, t);
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn assignment(&self, i: usize) -> usize {
        self.assignment[i] as usize
    }

    /// Document, word and weight of slot `i`.
    pub fn slot(&self, i: usize) -> (usize, usize, f64) {
        let s = self.slots[i];
        (s.doc as usize, s.word as usize, s.weight)
    }

    /// Largest absolute violation of the count-conservation laws:
    /// `sum_k n_dk = len(d)` for every document and
    /// `sum_w n_kw = n_k` for every topic. Also recounts both tables from the
    /// assignment vector and reports the worst mismatch.
    pub fn conservation_error(&self) -> f64 {
        let k = self.params.topics;
        let v = self.vocab;
        let mut worst: f64 = 0.0;
        for d in 0..self.num_docs {
            let s: f64 = self.doc_topic[d * k..(d + 1) * k].iter().sum();
            worst = worst.max((s - self.doc_len[d]).abs());
        }
        for t in 0..k {
            let s: f64 = self.topic_word[t * v..(t + 1) * v].iter().sum();
            worst = worst.max((s - self.topic_total[t]).abs());
        }
        let mut dt = vec![0.0; self.doc_topic.len()];
        let mut tw = vec![0.0; self.topic_word.len()];
        for (slot, &z) in self.slots.iter().zip(&self.assignment) {
            dt[slot.doc as usize * k + z as usize] += slot.weight;
            tw[z as usize * v + slot.word as usize] += slot.weight;
        }
        for (a, b) in dt.iter().zip(&self.doc_topic).chain(tw.iter().zip(&self.topic_word)) {
            worst = worst.max((a - b).abs());
        }
        worst
    }

    /// Topic-word distributions implied by the current counts.
    pub fn phi(&self) -> Vec<f64> {
        let v = self.vocab;
        let beta = self.params.beta;
        let mut phi = vec![0.0; self.params.topics * v];
        for t in 0..self.params.topics {
            let denom = self.topic_total[t] + v as f64 * beta;
            for w in 0..v {
                phi[t * v + w] = (self.topic_word[t * v + w] + beta) / denom;
            }
        }
        phi
    }

    /// Training-set perplexity from the current counts, with each document's
    /// topic mixture `(n_dk + alpha) / (len(d) + K * alpha)`.
    pub fn perplexity(&self) -> f64 {
        let k = self.params.topics;
        let v = self.vocab;
        let alpha = self.params.alpha;
        let phi = self.phi();
        let mut loglik = 0.0;
        let mut total = 0.0;
        for s in &self.slots {
            let d = s.doc as usize;
            let denom = self.doc_len[d] + k as f64 * alpha;
            let p: f64 = (0..k)
                .map(|t| (self.doc_topic[d * k + t] + alpha) / denom * phi[t * v + s.word as usize])
                .sum();
            loglik += s.weight * p.ln();
            total += s.weight;
        }
        if total == 0.0 {
            return 1.0;
        }
        (-loglik / total).exp()
    }

    pub fn into_model(self) -> LdaModel {
        let phi = self.phi();
        LdaModel {
            topics: self.params.topics,
            vocab: self.vocab,
            alpha: self.params.alpha,
            beta: self.params.beta,
            seed: self.params.seed,
            iterations: self.sweeps,
            phi,
        }
    }
}

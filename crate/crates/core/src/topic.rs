//! LDA topic model trained by collapsed Gibbs sampling, with UMass
//! coherence for picking the topic count.
//!
//! Each sweep resamples every token's topic from the standard collapsed
//! conditional p(z=k) proportional to
//! (doc_topic - self + alpha) * (topic_word - self + beta) / (topic_total - self + V*beta).
//! After the configured sweeps, theta and phi are estimated from the final
//! counts. All sampling runs through the crate RNG, so a fixed seed gives
//! bit-identical models.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenCorpus;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Source};
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaConfig {
    /// topic count
    pub k: usize,
    /// symmetric document-topic prior; None = 50/K
    pub alpha: Option<f64>,
    /// symmetric topic-word prior
    pub beta: f64,
    /// Gibbs sweeps
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        LdaConfig {
            k,
            alpha: None,
            beta: 0.01,
            iterations: 50,
            seed,
        }
    }

    pub fn alpha_value(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 || self.alpha_value() <= 0.0 || self.beta <= 0.0 || self.iterations < 1 {
            return Err(Error::InvalidConfig(format!(
                "LDA requires K >= 2, alpha > 0, beta > 0, iterations >= 1 \
                 (K={}, alpha={}, beta={}, iterations={})",
                self.k,
                self.alpha_value(),
                self.beta,
                self.iterations
            )));
        }
        Ok(())
    }
}

/// Gibbs sampler state: topic assignments plus their count histograms.
#[derive(Debug, Clone)]
pub struct LdaState {
    /// topic of every token position, per document
    pub z: Vec<Vec<usize>>,
    /// n x K
    pub doc_topic_counts: Vec<Vec<usize>>,
    /// K x V
    pub topic_word_counts: Vec<Vec<usize>>,
    /// K
    pub topic_totals: Vec<usize>,
}

/// Trained model: smoothed theta (n x K) and phi (K x V).
#[derive(Debug, Clone)]
pub struct TopicModel {
    pub theta: Array2<f64>,
    pub phi: Array2<f64>,
    pub config: LdaConfig,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.theta.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.phi.ncols()
    }

    /// Indices of the `top_n` highest-probability words of one topic,
    /// descending by phi (ties to the lower vocabulary index).
    pub fn top_words(&self, topic: usize, top_n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vocab_size()).collect();
        idx.sort_by(|&a, &b| {
            self.phi[[topic, b]]
                .partial_cmp(&self.phi[[topic, a]])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx.truncate(top_n);
        idx
    }
}

/// Incremental collapsed Gibbs sampler. Exposed so callers can interleave
/// sweeps with their own checks; `gibbs_train` drives it to completion.
pub struct GibbsSampler<'c> {
    corpus: &'c TokenCorpus,
    config: LdaConfig,
    state: LdaState,
    rng: Rng,
}

impl<'c> GibbsSampler<'c> {
    pub fn new(corpus: &'c TokenCorpus, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        if corpus.n() == 0 {
            return Err(Error::EmptyCorpus);
        }
        let k = config.k;
        let v = corpus.term_count();
        let mut rng = Rng::from_seed(config.seed);
        let mut state = LdaState {
            z: Vec::with_capacity(corpus.n()),
            doc_topic_counts: vec![vec![0; k]; corpus.n()],
            topic_word_counts: vec![vec![0; v]; k],
            topic_totals: vec![0; k],
        };
        for (d, doc) in corpus.docs().iter().enumerate() {
            let mut zs = Vec::with_capacity(doc.tokens.len());
            for &w in &doc.tokens {
                let topic = rng.gen_range(k);
                zs.push(topic);
                state.doc_topic_counts[d][topic] += 1;
                state.topic_word_counts[topic][w] += 1;
                state.topic_totals[topic] += 1;
            }
            state.z.push(zs);
        }
        Ok(GibbsSampler {
            corpus,
            config,
            state,
            rng,
        })
    }

    pub fn state(&self) -> &LdaState {
        &self.state
    }

    /// One full sweep: resample the topic of every token position in order.
    pub fn sweep(&mut self) {
        let k = self.config.k;
        let v = self.corpus.term_count() as f64;
        let alpha = self.config.alpha_value();
        let beta = self.config.beta;
        let mut weights = vec![0.0f64; k];

        for (d, doc) in self.corpus.docs().iter().enumerate() {
            for (pos, &w) in doc.tokens.iter().enumerate() {
                let old = self.state.z[d][pos];
                self.state.doc_topic_counts[d][old] -= 1;
                self.state.topic_word_counts[old][w] -= 1;
                self.state.topic_totals[old] -= 1;

                let mut total = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    let p = (self.state.doc_topic_counts[d][t] as f64 + alpha)
                        * (self.state.topic_word_counts[t][w] as f64 + beta)
                        / (self.state.topic_totals[t] as f64 + v * beta);
                    total += p;
                    *weight = total;
                }
                let u = self.rng.next_f64() * total;
                let new = weights.iter().position(|&cum| u < cum).unwrap_or(k - 1);

                self.state.z[d][pos] = new;
                self.state.doc_topic_counts[d][new] += 1;
                self.state.topic_word_counts[new][w] += 1;
                self.state.topic_totals[new] += 1;
            }
        }
    }

    /// Estimate theta and phi from the current counts.
    pub fn into_model(self) -> TopicModel {
        let n = self.corpus.n();
        let k = self.config.k;
        let v = self.corpus.term_count();
        let alpha = self.config.alpha_value();
        let beta = self.config.beta;

        let mut theta = Array2::<f64>::zeros((n, k));
        for (d, doc) in self.corpus.docs().iter().enumerate() {
            let len = doc.tokens.len() as f64;
            for t in 0..k {
                theta[[d, t]] = (self.state.doc_topic_counts[d][t] as f64 + alpha)
                    / (len + k as f64 * alpha);
            }
        }
        let mut phi = Array2::<f64>::zeros((k, v));
        for t in 0..k {
            let total = self.state.topic_totals[t] as f64;
            for w in 0..v {
                phi[[t, w]] = (self.state.topic_word_counts[t][w] as f64 + beta)
                    / (total + v as f64 * beta);
            }
        }
        TopicModel {
            theta,
            phi,
            config: self.config,
        }
    }
}

/// Train an LDA model: initialize, run the configured sweeps, estimate.
pub fn gibbs_train(corpus: &TokenCorpus, config: LdaConfig) -> Result<TopicModel> {
    if config.k > corpus.term_count() {
        // V >= K is recommended; smaller vocabularies still work but topics
        // cannot all be distinct.
        eprintln!(
            "warning: topic count K={} exceeds vocabulary size V={}",
            config.k,
            corpus.term_count()
        );
    }
    let mut sampler = GibbsSampler::new(corpus, config)?;
    for _ in 0..sampler.config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

/// UMass coherence of one model over its training corpus: mean over topics
/// of (2 / (N (N-1))) * sum over ordered top-word pairs of
/// ln((D(w_i, w_j) + 1) / D(w_j)), where D counts containing documents.
pub fn umass_coherence(model: &TopicModel, corpus: &TokenCorpus, top_n: usize) -> Result<f64> {
    if top_n < 2 {
        return Err(Error::InvalidConfig("coherence needs top_n >= 2".into()));
    }
    // document sets per word, as sorted doc indices
    let mut doc_sets: Vec<Vec<usize>> = vec![Vec::new(); corpus.term_count()];
    for (d, doc) in corpus.docs().iter().enumerate() {
        for &w in &doc.tokens {
            if doc_sets[w].last() != Some(&d) {
                doc_sets[w].push(d);
            }
        }
    }

    let mut total = 0.0;
    for topic in 0..model.k() {
        let words = model.top_words(topic, top_n);
        let n = words.len();
        let mut score = 0.0;
        for i in 1..n {
            for j in 0..i {
                let wi = words[i];
                let wj = words[j];
                let d_j = doc_sets[wj].len();
                if d_j == 0 {
                    return Err(Error::WordWithZeroDf(corpus.token(wj).to_owned()));
                }
                let co = co_occurrence(&doc_sets[wi], &doc_sets[wj]);
                score += ((co as f64 + 1.0) / d_j as f64).ln();
            }
        }
        total += 2.0 / (n as f64 * (n - 1) as f64) * score;
    }
    Ok(total / model.k() as f64)
}

/// |A intersect B| of two sorted index lists.
fn co_occurrence(a: &[usize], b: &[usize]) -> usize {
    let mut count = 0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Train one model per candidate K (each seeded seed + K) and return the
/// coherence-maximizing count with the full score table. Ties break to the
/// smaller K.
pub fn select_topic_count(
    corpus: &TokenCorpus,
    candidates: &[usize],
    base_config: &LdaConfig,
    top_n: usize,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no topic-count candidates".into()));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for &k in candidates {
        let config = LdaConfig {
            k,
            seed: base_config.seed + k as u64,
            ..base_config.clone()
        };
        let model = gibbs_train(corpus, config)?;
        let score = umass_coherence(&model, corpus, top_n)?;
        scores.push((k, score));
    }
    let mut best = scores[0];
    for &(k, s) in &scores[1..] {
        if s > best.1 || (s == best.1 && k < best.0) {
            best = (k, s);
        }
    }
    Ok((best.0, scores))
}

/// Document-topic probabilities as the topic-source feature matrix.
pub fn topic_features(model: &TopicModel, doc_ids: Vec<String>) -> Result<FeatureMatrix> {
    FeatureMatrix::new(Source::Topic, model.theta.clone(), doc_ids)
}

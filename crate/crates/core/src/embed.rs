//! Distributed embeddings: skip-gram word2vec with negative sampling, and
//! PV-DBOW doc2vec.
//!
//! Training is strictly sequential (documents in order, positions in order)
//! with every random draw coming from the crate RNG, so a fixed seed gives
//! bit-identical embedding tables. Negatives are sampled from the unigram
//! distribution raised to 3/4. The learning rate decays linearly from
//! lr_start to lr_end over the total number of updates.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenCorpus;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Source};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    W2v,
    D2v,
}

impl EmbedMode {
    pub fn name(self) -> &'static str {
        match self {
            EmbedMode::W2v => "w2v",
            EmbedMode::D2v => "d2v",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "w2v" => Ok(EmbedMode::W2v),
            "d2v" => Ok(EmbedMode::D2v),
            other => Err(Error::InvalidConfig(format!("unknown embed mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub mode: EmbedMode,
    pub dim: usize,
    /// symmetric context radius
    pub window: usize,
    /// training epochs
    pub iterations: usize,
    /// negative samples per positive
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
}

impl EmbedConfig {
    /// Defaults: dim 200, 100 epochs, 5 negatives, lr 0.025 -> 0.0001,
    /// window 1 for word2vec and 5 for doc2vec.
    pub fn new(mode: EmbedMode, seed: u64) -> Self {
        EmbedConfig {
            mode,
            dim: 200,
            window: match mode {
                EmbedMode::W2v => 1,
                EmbedMode::D2v => 5,
            },
            iterations: 100,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 1
            || self.window < 1
            || self.iterations < 1
            || self.negatives < 1
            || self.lr_start < self.lr_end
            || self.lr_end <= 0.0
        {
            return Err(Error::InvalidConfig(format!(
                "embedding config must satisfy dim >= 1, window >= 1, iterations >= 1, \
                 negatives >= 1, lr_start >= lr_end > 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Token embedding table (input vectors), one row per vocabulary entry.
#[derive(Debug, Clone)]
pub struct WordVectors {
    pub vectors: Array2<f64>,
    pub tokens: Vec<String>,
}

impl WordVectors {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }
}

/// Document embedding table, rows in corpus order.
#[derive(Debug, Clone)]
pub struct DocVectors {
    pub vectors: Array2<f64>,
    pub doc_ids: Vec<String>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Negative-sampling loss for one (input, positive, negatives) instance:
/// -ln sigma(v.u_pos) - sum_n ln sigma(-v.u_n).
pub fn negative_sampling_loss(input: &[f64], positive: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut loss = -sigmoid(dot(input, positive)).ln();
    for neg in negatives {
        loss -= sigmoid(-dot(input, neg)).ln();
    }
    loss
}

/// Analytic gradients of `negative_sampling_loss` with respect to the input
/// vector, the positive output vector and each negative output vector.
pub fn negative_sampling_gradients(
    input: &[f64],
    positive: &[f64],
    negatives: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let dim = input.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let gp = sigmoid(dot(input, positive)) - 1.0;
    let mut grad_input: Vec<f64> = positive.iter().map(|&u| gp * u).collect();
    let grad_pos: Vec<f64> = input.iter().map(|&v| gp * v).collect();
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let gn = sigmoid(dot(input, neg));
        for d in 0..dim {
            grad_input[d] += gn * neg[d];
        }
        grad_negs.push(input.iter().map(|&v| gn * v).collect());
    }
    (grad_input, grad_pos, grad_negs)
}

/// Cumulative unigram^(3/4) table for negative sampling.
struct NegativeTable {
    cumulative: Vec<f64>,
    total: f64,
}

impl NegativeTable {
    fn from_corpus(corpus: &TokenCorpus) -> Self {
        let mut counts = vec![0usize; corpus.term_count()];
        for doc in corpus.docs() {
            for &t in &doc.tokens {
                counts[t] += 1;
            }
        }
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut total = 0.0;
        for &c in &counts {
            total += (c as f64).powf(0.75);
            cumulative.push(total);
        }
        NegativeTable { cumulative, total }
    }

    fn sample(&self, rng: &mut Rng) -> usize {
        let u = rng.next_f64() * self.total;
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// One SGD step on (input vector, positive target, sampled negatives) in the
/// shared output table. Output rows are updated with the pre-step input
/// vector; the input vector gets the accumulated gradient afterwards.
fn train_pair(
    input: &mut [f64],
    outputs: &mut Array2<f64>,
    positive: usize,
    table: &NegativeTable,
    negatives: usize,
    lr: f64,
    rng: &mut Rng,
) {
    fn step(
        target: usize,
        label: f64,
        lr: f64,
        input: &[f64],
        input_delta: &mut [f64],
        outputs: &mut Array2<f64>,
    ) {
        let mut f = 0.0;
        for (d, &v) in input.iter().enumerate() {
            f += v * outputs[[target, d]];
        }
        let g = (label - sigmoid(f)) * lr;
        for (d, &v) in input.iter().enumerate() {
            input_delta[d] += g * outputs[[target, d]];
            outputs[[target, d]] += g * v;
        }
    }

    let mut input_delta = vec![0.0f64; input.len()];
    step(positive, 1.0, lr, input, &mut input_delta, outputs);
    for _ in 0..negatives {
        let target = table.sample(rng);
        if target == positive {
            // a negative colliding with the positive contributes nothing useful
            continue;
        }
        step(target, 0.0, lr, input, &mut input_delta, outputs);
    }
    for (d, delta) in input_delta.into_iter().enumerate() {
        input[d] += delta;
    }
}

fn linear_lr(config: &EmbedConfig, done: usize, total: usize) -> f64 {
    if total == 0 {
        return config.lr_start;
    }
    let frac = done as f64 / total as f64;
    (config.lr_start - (config.lr_start - config.lr_end) * frac).max(config.lr_end)
}

/// Train skip-gram word vectors with negative sampling.
pub fn train_word2vec(corpus: &TokenCorpus, config: &EmbedConfig) -> Result<WordVectors> {
    config.validate()?;
    if config.mode != EmbedMode::W2v {
        return Err(Error::InvalidConfig("train_word2vec requires mode w2v".into()));
    }
    let v = corpus.term_count();
    let dim = config.dim;
    let mut rng = Rng::from_seed(config.seed);

    let span = 0.5 / dim as f64;
    let mut input = Array2::from_shape_fn((v, dim), |_| rng.gen_f64_range(-span, span));
    let mut output = Array2::<f64>::zeros((v, dim));
    let table = NegativeTable::from_corpus(corpus);

    // (position, context) pairs per epoch, for the LR schedule
    let pairs_per_epoch: usize = corpus
        .docs()
        .iter()
        .map(|doc| {
            let len = doc.tokens.len();
            (0..len)
                .map(|t| t.min(config.window) + (len - 1 - t).min(config.window))
                .sum::<usize>()
        })
        .sum();
    let total_updates = pairs_per_epoch * config.iterations;
    let mut done = 0usize;

    for _ in 0..config.iterations {
        for doc in corpus.docs() {
            let tokens = &doc.tokens;
            for t in 0..tokens.len() {
                let lo = t.saturating_sub(config.window);
                let hi = (t + config.window).min(tokens.len() - 1);
                for c in lo..=hi {
                    if c == t {
                        continue;
                    }
                    let lr = linear_lr(config, done, total_updates);
                    let mut center = input.row_mut(tokens[t]);
                    train_pair(
                        center.as_slice_mut().expect("contiguous row"),
                        &mut output,
                        tokens[c],
                        &table,
                        config.negatives,
                        lr,
                        &mut rng,
                    );
                    done += 1;
                }
            }
        }
    }

    Ok(WordVectors {
        vectors: input,
        tokens: corpus.vocab().to_vec(),
    })
}

/// Document features as the mean of its tokens' word vectors (duplicates
/// weight the mean).
pub fn word2vec_doc_features(corpus: &TokenCorpus, wv: &WordVectors) -> Result<FeatureMatrix> {
    let dim = wv.dim();
    let lookup: std::collections::HashMap<&str, usize> = wv
        .tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let mut rows = Array2::<f64>::zeros((corpus.n(), dim));
    for (i, doc) in corpus.docs().iter().enumerate() {
        for &tok in &doc.tokens {
            let token = corpus.token(tok);
            let row = *lookup
                .get(token)
                .ok_or_else(|| Error::MissingToken(token.to_owned()))?;
            for d in 0..dim {
                rows[[i, d]] += wv.vectors[[row, d]];
            }
        }
        let len = doc.tokens.len() as f64;
        for d in 0..dim {
            rows[[i, d]] /= len;
        }
    }
    FeatureMatrix::new(Source::Embed, rows, corpus.doc_ids())
}

/// Train PV-DBOW document vectors: each step samples a window of the
/// document, then a target word inside it, and updates the document vector
/// against the target plus sampled negatives through a shared word output
/// table. Word input vectors are not trained.
pub fn train_doc2vec(corpus: &TokenCorpus, config: &EmbedConfig) -> Result<DocVectors> {
    config.validate()?;
    if config.mode != EmbedMode::D2v {
        return Err(Error::InvalidConfig("train_doc2vec requires mode d2v".into()));
    }
    let n = corpus.n();
    let v = corpus.term_count();
    let dim = config.dim;
    let mut rng = Rng::from_seed(config.seed);

    let span = 0.5 / dim as f64;
    let mut doc_vecs = Array2::from_shape_fn((n, dim), |_| rng.gen_f64_range(-span, span));
    let mut output = Array2::<f64>::zeros((v, dim));
    let table = NegativeTable::from_corpus(corpus);

    let steps_per_epoch: usize = corpus.docs().iter().map(|d| d.tokens.len()).sum();
    let total_updates = steps_per_epoch * config.iterations;
    let mut done = 0usize;

    for _ in 0..config.iterations {
        for (d, doc) in corpus.docs().iter().enumerate() {
            let len = doc.tokens.len();
            for _ in 0..len {
                let anchor = rng.gen_range(len);
                let end = (anchor + config.window).min(len);
                let target = doc.tokens[anchor + rng.gen_range(end - anchor)];
                let lr = linear_lr(config, done, total_updates);
                let mut row = doc_vecs.row_mut(d);
                train_pair(
                    row.as_slice_mut().expect("contiguous row"),
                    &mut output,
                    target,
                    &table,
                    config.negatives,
                    lr,
                    &mut rng,
                );
                done += 1;
            }
        }
    }

    Ok(DocVectors {
        vectors: doc_vecs,
        doc_ids: corpus.doc_ids(),
    })
}

/// Train the configured embedding and emit document features.
pub fn embed_features(corpus: &TokenCorpus, config: &EmbedConfig) -> Result<FeatureMatrix> {
    match config.mode {
        EmbedMode::W2v => {
            let wv = train_word2vec(corpus, config)?;
            word2vec_doc_features(corpus, &wv)
        }
        EmbedMode::D2v => {
            let dv = train_doc2vec(corpus, config)?;
            FeatureMatrix::new(Source::Embed, dv.vectors, dv.doc_ids)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenCorpus;
    use crate::rng::Rng;
    use crate::simmat::cosine;
    use ndarray::arr2;

    fn corpus_of(docs: &[&str]) -> TokenCorpus {
        TokenCorpus::from_token_docs(
            docs.iter()
                .enumerate()
                .map(|(i, text)| {
                    (
                        i.to_string(),
                        text.split_whitespace().map(str::to_owned).collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn small_config(mode: EmbedMode, dim: usize, iterations: usize) -> EmbedConfig {
        EmbedConfig {
            dim,
            iterations,
            ..EmbedConfig::new(mode, 1)
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::from_seed(42);
        for _ in 0..20 {
            let dim = 2 + rng.gen_range(6);
            let negs = 1 + rng.gen_range(4);
            let input: Vec<f64> = (0..dim).map(|_| rng.gen_f64_range(-1.0, 1.0)).collect();
            let positive: Vec<f64> = (0..dim).map(|_| rng.gen_f64_range(-1.0, 1.0)).collect();
            let negatives: Vec<Vec<f64>> = (0..negs)
                .map(|_| (0..dim).map(|_| rng.gen_f64_range(-1.0, 1.0)).collect())
                .collect();

            let (gi, gp, gn) = negative_sampling_gradients(&input, &positive, &negatives);
            let eps = 1e-6;
            let check = |analytic: f64, plus: f64, minus: f64| {
                let numeric = (plus - minus) / (2.0 * eps);
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    ((analytic - numeric) / denom).abs() < 1e-4,
                    "analytic {analytic} vs numeric {numeric}"
                );
            };
            for d in 0..dim {
                let mut ip = input.clone();
                let mut im = input.clone();
                ip[d] += eps;
                im[d] -= eps;
                check(
                    gi[d],
                    negative_sampling_loss(&ip, &positive, &negatives),
                    negative_sampling_loss(&im, &positive, &negatives),
                );
                let mut pp = positive.clone();
                let mut pm = positive.clone();
                pp[d] += eps;
                pm[d] -= eps;
                check(
                    gp[d],
                    negative_sampling_loss(&input, &pp, &negatives),
                    negative_sampling_loss(&input, &pm, &negatives),
                );
            }
            for (k, gnk) in gn.iter().enumerate() {
                for d in 0..dim {
                    let mut np = negatives.clone();
                    let mut nm = negatives.clone();
                    np[k][d] += eps;
                    nm[k][d] -= eps;
                    check(
                        gnk[d],
                        negative_sampling_loss(&input, &positive, &np),
                        negative_sampling_loss(&input, &positive, &nm),
                    );
                }
            }
        }
    }

    #[test]
    fn w2v_shapes_and_determinism() {
        let corpus = corpus_of(&["a b a c", "b a b", "c d c"]);
        let config = small_config(EmbedMode::W2v, 8, 3);
        let w1 = train_word2vec(&corpus, &config).unwrap();
        let w2 = train_word2vec(&corpus, &config).unwrap();
        assert_eq!(w1.vectors.dim(), (4, 8));
        assert_eq!(w1.vectors, w2.vectors);
    }

    #[test]
    fn cooccurring_tokens_closer() {
        // a and b always co-occur (sharing contexts e, f); c lives in
        // disjoint documents with its own context words
        let mut rng = Rng::from_seed(9);
        let mut docs = Vec::new();
        for _ in 0..20 {
            for vocab in [["a", "b", "e", "f"], ["c", "d", "g", "h"]] {
                let tokens: Vec<&str> = (0..12).map(|_| vocab[rng.gen_range(4)]).collect();
                docs.push(tokens.join(" "));
            }
        }
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let corpus = corpus_of(&refs);
        let config = small_config(EmbedMode::W2v, 16, 30);
        let wv = train_word2vec(&corpus, &config).unwrap();
        let a = wv.vectors.row(corpus.index_of("a").unwrap());
        let b = wv.vectors.row(corpus.index_of("b").unwrap());
        let c = wv.vectors.row(corpus.index_of("c").unwrap());
        assert!(cosine(a, b) > cosine(a, c) + 0.2);
    }

    #[test]
    fn doc_feature_averaging() {
        let corpus = corpus_of(&["a", "a b", "a a b"]);
        let wv = WordVectors {
            vectors: arr2(&[[2.0, 0.0], [0.0, 4.0]]),
            tokens: vec!["a".into(), "b".into()],
        };
        let fm = word2vec_doc_features(&corpus, &wv).unwrap();
        // single token: the vector itself
        assert_eq!(fm.rows.row(0).to_vec(), vec![2.0, 0.0]);
        // [a, b]: mean componentwise
        assert_eq!(fm.rows.row(1).to_vec(), vec![1.0, 2.0]);
        // [a, a, b]: (2*vec_a + vec_b) / 3
        let r = fm.rows.row(2);
        assert!((r[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((r[1] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn doc_feature_missing_token() {
        let corpus = corpus_of(&["a b"]);
        let wv = WordVectors {
            vectors: arr2(&[[1.0, 0.0]]),
            tokens: vec!["a".into()],
        };
        assert!(matches!(
            word2vec_doc_features(&corpus, &wv),
            Err(Error::MissingToken(t)) if t == "b"
        ));
    }

    #[test]
    fn averaging_is_linear_in_concatenation() {
        let corpus = corpus_of(&["a b", "c", "a b c"]);
        let wv = WordVectors {
            vectors: arr2(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]),
            tokens: vec!["a".into(), "b".into(), "c".into()],
        };
        let fm = word2vec_doc_features(&corpus, &wv).unwrap();
        // doc2 = concat(doc0, doc1): mean = (2*mean0 + 1*mean1) / 3
        for d in 0..2 {
            let expect = (2.0 * fm.rows[[0, d]] + fm.rows[[1, d]]) / 3.0;
            assert!((fm.rows[[2, d]] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn d2v_duplicated_docs_close() {
        let mut docs = vec![
            "q w e r t y q w e r t y",
            "q w e r t y q w e r t y",
        ];
        for _ in 0..6 {
            docs.push("m n b v c x m n b v c x");
        }
        let corpus = corpus_of(&docs);
        let config = small_config(EmbedMode::D2v, 16, 40);
        let dv = train_doc2vec(&corpus, &config).unwrap();
        let d0 = dv.vectors.row(0);
        let d1 = dv.vectors.row(1);
        let twin = cosine(d0, d1);
        for other in 2..corpus.n() {
            let c = cosine(d0, dv.vectors.row(other));
            assert!(twin > c, "twin {twin} vs doc {other}: {c}");
        }
    }

    #[test]
    fn d2v_deterministic() {
        let corpus = corpus_of(&["a b c d e", "e d c b a"]);
        let config = small_config(EmbedMode::D2v, 4, 5);
        let a = train_doc2vec(&corpus, &config).unwrap();
        let b = train_doc2vec(&corpus, &config).unwrap();
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn dispatch_row_count() {
        let corpus = corpus_of(&["a b c", "c b a", "b b b"]);
        for mode in [EmbedMode::W2v, EmbedMode::D2v] {
            let fm = embed_features(&corpus, &small_config(mode, 4, 2)).unwrap();
            assert_eq!(fm.n(), 3);
            assert_eq!(fm.source, Source::Embed);
            assert_eq!(fm.dim(), 4);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let corpus = corpus_of(&["a b"]);
        let bad = EmbedConfig {
            lr_end: 0.0,
            ..EmbedConfig::new(EmbedMode::W2v, 1)
        };
        assert!(matches!(
            train_word2vec(&corpus, &bad),
            Err(Error::InvalidConfig(_))
        ));
        let wrong_mode = EmbedConfig::new(EmbedMode::D2v, 1);
        assert!(matches!(
            train_word2vec(&corpus, &wrong_mode),
            Err(Error::InvalidConfig(_))
        ));
    }
}

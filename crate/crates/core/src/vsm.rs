//! TF-IDF vector space model features.
//!
//! Weight of token i in document d: (n_i(d) / t(d)) * ln(n / df_i), with
//! n the corpus size, t(d) the document length and df_i the document
//! frequency of the token. Tokens absent from a document weigh zero, as
//! does any token present in every document (ln(n/n) = 0).

use ndarray::Array2;

use crate::corpus::TokenCorpus;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Source};

/// Corpus-level statistics backing the TF-IDF computation.
#[derive(Debug, Clone)]
pub struct TfIdfStats {
    /// document frequency per vocabulary index
    pub df: Vec<usize>,
    /// corpus size
    pub n: usize,
    /// per-document token counts, sparse as (vocab index, count)
    pub doc_counts: Vec<Vec<(usize, usize)>>,
    /// per-document lengths t(d)
    pub doc_lens: Vec<usize>,
}

impl TfIdfStats {
    pub fn from_corpus(corpus: &TokenCorpus) -> Self {
        let mut df = vec![0usize; corpus.term_count()];
        let mut doc_counts = Vec::with_capacity(corpus.n());
        let mut doc_lens = Vec::with_capacity(corpus.n());
        for doc in corpus.docs() {
            let mut counts: Vec<(usize, usize)> = Vec::new();
            let mut sorted = doc.tokens.clone();
            sorted.sort_unstable();
            for &tok in &sorted {
                match counts.last_mut() {
                    Some((t, c)) if *t == tok => *c += 1,
                    _ => counts.push((tok, 1)),
                }
            }
            for &(tok, _) in &counts {
                df[tok] += 1;
            }
            doc_lens.push(doc.tokens.len());
            doc_counts.push(counts);
        }
        TfIdfStats {
            df,
            n: corpus.n(),
            doc_counts,
            doc_lens,
        }
    }
}

/// TF-IDF weight of one token in one document.
pub fn tfidf_weight(token_count: usize, doc_len: usize, df: usize, n: usize) -> f64 {
    debug_assert!(doc_len >= 1 && df >= 1 && df <= n);
    if token_count == 0 {
        return 0.0;
    }
    (token_count as f64 / doc_len as f64) * (n as f64 / df as f64).ln()
}

/// Dense n x term_count TF-IDF matrix in vocabulary order.
pub fn vsm_features(corpus: &TokenCorpus) -> Result<FeatureMatrix> {
    if corpus.n() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let stats = TfIdfStats::from_corpus(corpus);
    features_from_stats(corpus, &stats)
}

/// Build the matrix from precomputed statistics. Kept separate so the
/// two-path consistency of direct and stats-based computation is testable.
pub fn features_from_stats(corpus: &TokenCorpus, stats: &TfIdfStats) -> Result<FeatureMatrix> {
    let n = stats.n;
    let dim = corpus.term_count();
    let mut rows = Array2::<f64>::zeros((n, dim));
    for (d, counts) in stats.doc_counts.iter().enumerate() {
        let len = stats.doc_lens[d];
        for &(tok, count) in counts {
            rows[[d, tok]] = tfidf_weight(count, len, stats.df[tok], n);
        }
    }
    FeatureMatrix::new(Source::Vsm, rows, corpus.doc_ids())
}

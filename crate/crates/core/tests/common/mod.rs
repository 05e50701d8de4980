//! Shared helpers for integration tests: deterministic synthetic corpora
//! written in the tool's token format, with ground-truth files.

use std::fs;
use std::path::{Path, PathBuf};

use hmff::rng::Rng;

/// Disjoint-vocabulary group corpus: `groups` groups of `docs_per_group`
/// documents, each group drawing from its own `vocab_per_group`-word
/// vocabulary, document lengths uniform in [len_lo, len_hi].
pub struct GroupCorpus {
    /// one document per line, whitespace-separated tokens
    pub lines: Vec<String>,
    /// (doc_id, class) pairs; doc ids are 1-based line numbers
    pub truth: Vec<(String, String)>,
}

pub fn group_corpus(
    gen_seed: u64,
    groups: usize,
    docs_per_group: usize,
    vocab_per_group: usize,
    len_lo: usize,
    len_hi: usize,
) -> GroupCorpus {
    let mut rng = Rng::from_seed(gen_seed);
    let mut lines = Vec::new();
    let mut truth = Vec::new();
    let mut line_no = 1usize;
    for g in 0..groups {
        for _ in 0..docs_per_group {
            let len = len_lo + rng.gen_range(len_hi - len_lo + 1);
            let tokens: Vec<String> = (0..len)
                .map(|_| format!("g{g}w{}", rng.gen_range(vocab_per_group)))
                .collect();
            lines.push(tokens.join(" "));
            truth.push((line_no.to_string(), format!("class{g}")));
            line_no += 1;
        }
    }
    GroupCorpus { lines, truth }
}

/// Mixed-signal corpus for the fusion-beats-single-source comparison.
///
/// Four groups of `docs_per_group` documents over a 20-word shared
/// vocabulary u0..u19 present in every document, so TF-IDF assigns every
/// u-word weight zero:
///   - group A: every u-word once + six marker words a0..a5 (lexical
///     signature: sharp for TF-IDF, weak for topic mixtures and averaged
///     embeddings because the markers ride on an identical u-profile)
///   - group B: same but with markers b0..b5
///   - group C: u0..u9 four times, u10..u19 once (count signature:
///     invisible to TF-IDF since every u-word has df = n, visible to topic
///     mixtures and embeddings)
///   - group D: u0..u9 once, u10..u19 four times
/// Every document draws one extra token from a small noise vocabulary,
/// spreading each group into a blob wider than the separations its blind
/// sources could otherwise exploit. Tokens are shuffled per document.
pub fn mixed_signal_corpus(gen_seed: u64, docs_per_group: usize) -> GroupCorpus {
    let mut rng = Rng::from_seed(gen_seed);
    let noise_vocab = 10usize;
    let noise_per_doc = 1usize;
    let marker_count = 6usize;
    let mut lines = Vec::new();
    let mut truth = Vec::new();
    let mut line_no = 1usize;
    for (class, spec) in ["a", "b", "c", "d"].iter().enumerate() {
        for _ in 0..docs_per_group {
            let mut tokens: Vec<String> = Vec::new();
            match *spec {
                "a" | "b" => {
                    for u in 0..20 {
                        tokens.push(format!("u{u}"));
                    }
                    for m in 0..marker_count {
                        tokens.push(format!("{spec}{m}"));
                    }
                }
                heavy => {
                    let (four, one) = if heavy == "c" { (0..10, 10..20) } else { (10..20, 0..10) };
                    for u in four {
                        for _ in 0..4 {
                            tokens.push(format!("u{u}"));
                        }
                    }
                    for u in one {
                        tokens.push(format!("u{u}"));
                    }
                }
            }
            for _ in 0..noise_per_doc {
                tokens.push(format!("nz{}", rng.gen_range(noise_vocab)));
            }
            // Fisher-Yates shuffle so windows mix the vocabulary
            for i in (1..tokens.len()).rev() {
                let j = rng.gen_range(i + 1);
                tokens.swap(i, j);
            }
            lines.push(tokens.join(" "));
            truth.push((line_no.to_string(), format!("class{class}")));
            line_no += 1;
        }
    }
    GroupCorpus { lines, truth }
}

/// Write corpus and truth files into `dir`; returns their paths.
pub fn write_corpus_files(dir: &Path, corpus: &GroupCorpus) -> (PathBuf, PathBuf) {
    let corpus_path = dir.join("corpus.txt");
    let truth_path = dir.join("truth.csv");
    fs::write(&corpus_path, corpus.lines.join("\n") + "\n").unwrap();
    let truth_text: String = corpus
        .truth
        .iter()
        .map(|(id, class)| format!("{id},{class}\n"))
        .collect();
    fs::write(&truth_path, truth_text).unwrap();
    (corpus_path, truth_path)
}

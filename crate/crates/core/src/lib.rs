//! Document clustering through hybrid multisource feature fusion (HMFF).
//!
//! Three independent text representations — a TF-IDF vector space model,
//! LDA topic mixtures trained by collapsed Gibbs sampling, and distributed
//! embeddings (skip-gram word2vec or PV-DBOW doc2vec) — are each turned into
//! an n x n mutual document-similarity matrix (Cosine-Euclidean for weights
//! and embeddings, Jensen-Shannon for topic mixtures). The top-k eigenpairs
//! of every similarity matrix are extracted and their eigenvalue-weighted
//! eigenvectors concatenated into one fused feature matrix, which k-means
//! then partitions. Clusters are scored with silhouette, F-measure and
//! accuracy (purity).
//!
//! The `pipeline` module orchestrates the full flow with stage caching; the
//! `hmff` binary exposes it as a CLI.

pub mod cache;
pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod pipeline;
pub mod porter;
pub mod rng;
pub mod simmat;
pub mod topic;
pub mod vsm;

pub use error::{Error, Result};

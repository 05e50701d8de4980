//! End-to-end orchestration: corpus -> per-source features -> similarity
//! matrices -> truncated eigendecomposition -> fusion -> k-means ->
//! evaluation, with transparent per-stage caching.
//!
//! Every stage writes one cache file stamped with a fingerprint of the
//! parameters that produced it. A rerun with the same configuration loads
//! the caches instead of recomputing; because cache files round-trip floats
//! exactly, warm and cold runs emit byte-identical outputs. The run manifest
//! records the configuration snapshot, stage paths and wall times.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache;
use crate::cluster::{kmeans, Clustering, KMeansConfig};
use crate::corpus::{self, StopwordList, TokenCorpus};
use crate::embed::{self, EmbedConfig, EmbedMode};
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport, LabeledGroundTruth};
use crate::features::{FeatureMatrix, Source};
use crate::fusion::{self, FusedFeatures};
use crate::simmat::{self, SimilarityMatrix};
use crate::topic::{self, LdaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// one raw document per line (or per file when the input is a directory)
    Raw,
    /// one document per line, whitespace-separated tokens
    Tokens,
}

/// How the topic count is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicSelection {
    Fixed(usize),
    /// coherence sweep over a candidate grid
    Auto { grid: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaParams {
    /// None = 50/K
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// top words per topic for coherence
    pub top_n: usize,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams {
            alpha: None,
            beta: 0.01,
            iterations: 50,
            top_n: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedParams {
    pub dim: usize,
    pub w2v_window: usize,
    pub d2v_window: usize,
    pub iterations: usize,
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            dim: 200,
            w2v_window: 1,
            d2v_window: 5,
            iterations: 100,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansParams {
    pub max_iter: usize,
    pub epsilon: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            max_iter: 300,
            epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: CorpusFormat,
    /// enabled sources; stored in canonical order (vsm, topic, embed)
    pub sources: Vec<Source>,
    pub embed_mode: EmbedMode,
    pub topics: TopicSelection,
    /// truncated eigenvectors per source
    pub eigen_k: usize,
    pub clusters: usize,
    pub seed: u64,
    /// repeated k-means runs with seeds seed..seed+runs-1
    pub runs: usize,
    pub out_dir: PathBuf,
    pub truth: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lda: LdaParams,
    pub embed: EmbedParams,
    pub kmeans: KMeansParams,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            format: CorpusFormat::Tokens,
            sources: Source::ALL.to_vec(),
            embed_mode: EmbedMode::W2v,
            topics: TopicSelection::Fixed(5),
            eigen_k: 3,
            clusters: 2,
            seed: 1,
            runs: 1,
            out_dir: out_dir.into(),
            truth: None,
            stopwords: None,
            lda: LdaParams::default(),
            embed: EmbedParams::default(),
            kmeans: KMeansParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::InvalidConfig("at least one source must be enabled".into()));
        }
        if self.eigen_k < 1 {
            return Err(Error::InvalidConfig("eigen_k must be >= 1".into()));
        }
        if self.clusters < 1 {
            return Err(Error::InvalidConfig("clusters must be >= 1".into()));
        }
        if self.runs < 1 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        if let TopicSelection::Auto { grid } = &self.topics {
            if grid.is_empty() {
                return Err(Error::InvalidConfig("empty topic candidate grid".into()));
            }
            if grid.iter().any(|&k| k < 2) {
                return Err(Error::InvalidConfig("topic candidates must be >= 2".into()));
            }
        }
        Ok(())
    }

    /// Sources in fixed fusion order, deduplicated.
    pub fn canonical_sources(&self) -> Vec<Source> {
        Source::ALL
            .into_iter()
            .filter(|s| self.sources.contains(s))
            .collect()
    }

    fn embed_config(&self) -> EmbedConfig {
        EmbedConfig {
            mode: self.embed_mode,
            dim: self.embed.dim,
            window: match self.embed_mode {
                EmbedMode::W2v => self.embed.w2v_window,
                EmbedMode::D2v => self.embed.d2v_window,
            },
            iterations: self.embed.iterations,
            negatives: self.embed.negatives,
            lr_start: self.embed.lr_start,
            lr_end: self.embed.lr_end,
            seed: self.seed,
        }
    }

    fn lda_config(&self, k: usize) -> LdaConfig {
        LdaConfig {
            k,
            alpha: self.lda.alpha,
            beta: self.lda.beta,
            iterations: self.lda.iterations,
            seed: self.seed + k as u64,
        }
    }
}

/// One stage in the manifest: output path, wall time, cache hit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub path: String,
    pub seconds: f64,
    pub cached: bool,
}

/// Reproduction record: configuration snapshot plus per-stage bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: PipelineConfig,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            kind: "manifest",
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

/// Scores of one k-means run in a multi-run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunScores {
    pub run: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub stdev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateScores {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<MetricStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_measure: Option<MetricStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<MetricStats>,
}

/// Flat evaluation report, extended with per-run scores and mean/stdev when
/// the pipeline repeats k-means over several seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    #[serde(flatten)]
    pub scores: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<RunScores>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<AggregateScores>,
}

/// Everything a completed run produces in memory.
#[derive(Debug)]
pub struct PipelineOutput {
    pub fused: FusedFeatures,
    pub clustering: Clustering,
    pub report: PipelineReport,
    pub manifest: RunManifest,
}

/// Stage driver with transparent caching.
pub struct Pipeline {
    config: PipelineConfig,
    stages: Vec<StageRecord>,
    corpus_fp: String,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let corpus_fp = corpus_content_fp(&config).map_err(|e| e.in_stage("corpus"))?;
        Ok(Pipeline {
            config,
            stages: Vec::new(),
            corpus_fp,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn record(&mut self, name: &str, path: &Path, start: Instant, cached: bool) {
        self.stages.push(StageRecord {
            name: name.to_owned(),
            path: path.display().to_string(),
            seconds: start.elapsed().as_secs_f64(),
            cached,
        });
    }

    // --- fingerprints ---

    fn corpus_fp(&self) -> String {
        self.corpus_fp.clone()
    }

    fn features_fp(&self, source: Source) -> String {
        let c = &self.config;
        let params = match source {
            Source::Vsm => format!("vsm|{}", self.corpus_fp()),
            Source::Topic => format!(
                "topic|{}|{:?}|{:?}|{}|{}|{}|{}",
                self.corpus_fp(),
                c.topics,
                c.lda.alpha,
                c.lda.beta,
                c.lda.iterations,
                c.lda.top_n,
                c.seed
            ),
            Source::Embed => format!(
                "embed|{}|{}|{}|{}|{}|{}|{}|{}|{}",
                self.corpus_fp(),
                c.embed_mode.name(),
                c.embed.dim,
                match c.embed_mode {
                    EmbedMode::W2v => c.embed.w2v_window,
                    EmbedMode::D2v => c.embed.d2v_window,
                },
                c.embed.iterations,
                c.embed.negatives,
                c.embed.lr_start,
                c.embed.lr_end,
                c.seed
            ),
        };
        cache::fingerprint(&params)
    }

    fn similarity_fp(&self, source: Source) -> String {
        cache::fingerprint(&format!("similarity|{}", self.features_fp(source)))
    }

    fn fused_fp(&self) -> String {
        let sims: Vec<String> = self
            .config
            .canonical_sources()
            .iter()
            .map(|&s| self.similarity_fp(s))
            .collect();
        cache::fingerprint(&format!("fused|{}|{}", sims.join("+"), self.config.eigen_k))
    }

    fn labels_fp(&self, seed: u64) -> String {
        cache::fingerprint(&format!(
            "labels|{}|{}|{}|{}|{seed}",
            self.fused_fp(),
            self.config.clusters,
            self.config.kmeans.max_iter,
            self.config.kmeans.epsilon
        ))
    }

    // --- stages ---

    /// Ingest and preprocess the corpus (cached as corpus.csv).
    pub fn corpus(&mut self) -> Result<TokenCorpus> {
        let start = Instant::now();
        let path = self.path("corpus.csv");
        let fp = self.corpus_fp();
        if cache::cache_matches(&path, "corpus", &fp) {
            let corpus = cache::read_corpus(&path).map_err(|e| e.in_stage("corpus"))?;
            self.record("corpus", &path, start, true);
            return Ok(corpus);
        }
        let corpus = self.build_corpus().map_err(|e| e.in_stage("corpus"))?;
        cache::write_corpus(&path, &corpus, &fp).map_err(|e| e.in_stage("corpus"))?;
        self.record("corpus", &path, start, false);
        Ok(corpus)
    }

    fn build_corpus(&self) -> Result<TokenCorpus> {
        let input = &self.config.input;
        let docs = if input.is_dir() {
            corpus::read_directory_documents(input)?
        } else {
            corpus::read_line_documents(input)?
        };
        let pre_tokenized = self.config.format == CorpusFormat::Tokens;
        let stops = match (&self.config.stopwords, pre_tokenized) {
            (_, true) => StopwordList::empty(),
            (Some(path), false) => StopwordList::from_file(path)?,
            (None, false) => StopwordList::english(),
        };
        corpus::build_corpus(docs, &stops, pre_tokenized)
    }

    /// Feature matrices for every enabled source, in canonical order.
    pub fn features(&mut self, corpus: &TokenCorpus) -> Result<Vec<FeatureMatrix>> {
        self.config
            .canonical_sources()
            .into_iter()
            .map(|source| self.features_for(corpus, source))
            .collect()
    }

    fn features_for(&mut self, corpus: &TokenCorpus, source: Source) -> Result<FeatureMatrix> {
        let start = Instant::now();
        let stage = match source {
            Source::Vsm => "features_vsm",
            Source::Topic => "features_topic",
            Source::Embed => "features_embed",
        };
        let path = self.path(&format!("{stage}.csv"));
        let fp = self.features_fp(source);
        if self.feature_cache_valid(source, &path, &fp) {
            let features = cache::read_features(&path).map_err(|e| e.in_stage(stage))?;
            self.record(stage, &path, start, true);
            return Ok(features);
        }
        let features = self
            .compute_features(corpus, source, &fp)
            .map_err(|e| e.in_stage(stage))?;
        cache::write_features(&path, &features, &fp).map_err(|e| e.in_stage(stage))?;
        self.record(stage, &path, start, false);
        Ok(features)
    }

    /// A feature stage is warm only when the matrix and its by-products
    /// (model dump, embedding table, sweep file) all match the fingerprint.
    fn feature_cache_valid(&self, source: Source, path: &Path, fp: &str) -> bool {
        if !cache::cache_matches(path, "features", fp) {
            return false;
        }
        match source {
            Source::Vsm => true,
            Source::Topic => {
                let model_ok = cache::cache_matches(&self.path("topic_model.csv"), "topic-model", fp);
                let sweep_ok = match &self.config.topics {
                    TopicSelection::Fixed(_) => true,
                    TopicSelection::Auto { .. } => {
                        cache::cache_matches(&self.path("topic_sweep.csv"), "topic-sweep", fp)
                    }
                };
                model_ok && sweep_ok
            }
            Source::Embed => cache::cache_matches(&self.path("embedding.csv"), "embedding", fp),
        }
    }

    fn compute_features(
        &self,
        corpus: &TokenCorpus,
        source: Source,
        fp: &str,
    ) -> Result<FeatureMatrix> {
        match source {
            Source::Vsm => crate::vsm::vsm_features(corpus),
            Source::Topic => {
                let k = match &self.config.topics {
                    TopicSelection::Fixed(k) => *k,
                    TopicSelection::Auto { grid } => {
                        let base = self.config.lda_config(2);
                        let base = LdaConfig {
                            seed: self.config.seed,
                            ..base
                        };
                        let (chosen, scores) =
                            topic::select_topic_count(corpus, grid, &base, self.config.lda.top_n)?;
                        cache::write_topic_sweep(
                            &self.path("topic_sweep.csv"),
                            chosen,
                            &scores,
                            fp,
                        )?;
                        chosen
                    }
                };
                let model = topic::gibbs_train(corpus, self.config.lda_config(k))?;
                cache::write_topic_model(&self.path("topic_model.csv"), &model, &corpus.doc_ids(), fp)?;
                topic::topic_features(&model, corpus.doc_ids())
            }
            Source::Embed => {
                let config = self.config.embed_config();
                match config.mode {
                    EmbedMode::W2v => {
                        let wv = embed::train_word2vec(corpus, &config)?;
                        cache::write_word_vectors(&self.path("embedding.csv"), &wv, fp)?;
                        embed::word2vec_doc_features(corpus, &wv)
                    }
                    EmbedMode::D2v => {
                        let dv = embed::train_doc2vec(corpus, &config)?;
                        cache::write_doc_vectors(&self.path("embedding.csv"), &dv, fp)?;
                        FeatureMatrix::new(Source::Embed, dv.vectors, dv.doc_ids)
                    }
                }
            }
        }
    }

    /// Similarity matrices per source: CE for vsm/embed, JS for topic.
    pub fn similarities(&mut self, features: &[FeatureMatrix]) -> Result<Vec<SimilarityMatrix>> {
        features
            .iter()
            .map(|fm| {
                let start = Instant::now();
                let stage = match fm.source {
                    Source::Vsm => "similarity_vsm",
                    Source::Topic => "similarity_topic",
                    Source::Embed => "similarity_embed",
                };
                let path = self.path(&format!("{stage}.csv"));
                let fp = self.similarity_fp(fm.source);
                if cache::cache_matches(&path, "similarity", &fp) {
                    let sim = cache::read_similarity(&path).map_err(|e| e.in_stage(stage))?;
                    self.record(stage, &path, start, true);
                    return Ok(sim);
                }
                let sim = simmat::similarity_matrix(fm).map_err(|e| e.in_stage(stage))?;
                cache::write_similarity(&path, &sim, &fp).map_err(|e| e.in_stage(stage))?;
                self.record(stage, &path, start, false);
                Ok(sim)
            })
            .collect()
    }

    /// Truncated eigendecompositions and fusion (cached as fused.csv).
    pub fn fused(
        &mut self,
        sims: &[SimilarityMatrix],
        doc_ids: Vec<String>,
    ) -> Result<FusedFeatures> {
        let start = Instant::now();
        let path = self.path("fused.csv");
        let fp = self.fused_fp();
        if cache::cache_matches(&path, "fused", &fp) {
            let fused = cache::read_fused(&path).map_err(|e| e.in_stage("fuse"))?;
            self.record("fuse", &path, start, true);
            return Ok(fused);
        }
        let eigs = sims
            .iter()
            .map(|sim| Ok((sim.source, fusion::truncated_eig(sim, self.config.eigen_k)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e: Error| e.in_stage("fuse"))?;
        let fused = fusion::fuse(&eigs, doc_ids).map_err(|e| e.in_stage("fuse"))?;
        cache::write_fused(&path, &fused, &fp).map_err(|e| e.in_stage("fuse"))?;
        self.record("fuse", &path, start, false);
        Ok(fused)
    }

    /// One k-means run over the fused features with the given seed.
    /// The base run (config.seed) is cached as labels.csv / trace.csv.
    pub fn cluster_run(&mut self, fused: &FusedFeatures, seed: u64) -> Result<Clustering> {
        let config = KMeansConfig {
            k: self.config.clusters,
            max_iter: self.config.kmeans.max_iter,
            epsilon: self.config.kmeans.epsilon,
            seed,
        };
        let clustering = kmeans(fused.matrix.view(), &config).map_err(|e| e.in_stage("cluster"))?;
        if seed == self.config.seed {
            let start = Instant::now();
            let labels_path = self.path("labels.csv");
            let fp = self.labels_fp(seed);
            cache::write_labels(&labels_path, &fused.doc_ids, &clustering, &fp)
                .map_err(|e| e.in_stage("cluster"))?;
            cache::write_trace(&self.path("trace.csv"), &clustering, &fp)
                .map_err(|e| e.in_stage("cluster"))?;
            self.record("cluster", &labels_path, start, false);
        }
        Ok(clustering)
    }

    fn load_truth(&self) -> Result<Option<LabeledGroundTruth>> {
        match &self.config.truth {
            Some(path) => Ok(Some(
                LabeledGroundTruth::from_file(path).map_err(|e| e.in_stage("evaluate"))?,
            )),
            None => Ok(None),
        }
    }

    /// Score one clustering: silhouette always (when k >= 2), external
    /// measures only with ground truth.
    fn score(
        &self,
        fused: &FusedFeatures,
        clustering: &Clustering,
        truth: Option<&LabeledGroundTruth>,
    ) -> Result<EvalReport> {
        let silhouette = if self.config.clusters >= 2 {
            Some(
                eval::silhouette(fused.matrix.view(), &clustering.labels)
                    .map_err(|e| e.in_stage("evaluate"))?,
            )
        } else {
            None
        };
        let (accuracy, f_measure, clusters) = match truth {
            Some(truth) => {
                let classes = truth
                    .classes_for(&fused.doc_ids)
                    .map_err(|e| e.in_stage("evaluate"))?;
                (
                    Some(eval::accuracy(&clustering.labels, &classes).map_err(|e| e.in_stage("evaluate"))?),
                    Some(eval::f_measure(&clustering.labels, &classes).map_err(|e| e.in_stage("evaluate"))?),
                    eval::cluster_diagnostics(&clustering.labels, &classes, truth.class_names())
                        .map_err(|e| e.in_stage("evaluate"))?,
                )
            }
            None => (None, None, Vec::new()),
        };
        Ok(EvalReport {
            accuracy,
            f_measure,
            silhouette,
            accuracy_definition: "purity".to_owned(),
            clusters,
        })
    }

    /// Full evaluation across `runs` seeded k-means repetitions. Returns the
    /// base-seed clustering and the report (with aggregates when runs > 1).
    pub fn evaluate(&mut self, fused: &FusedFeatures) -> Result<(Clustering, PipelineReport)> {
        let truth = self.load_truth()?;
        let start = Instant::now();
        let base = self.cluster_run(fused, self.config.seed)?;
        let base_scores = self.score(fused, &base, truth.as_ref())?;

        let (runs, aggregate) = if self.config.runs > 1 {
            let mut all = Vec::with_capacity(self.config.runs);
            all.push(RunScores {
                run: 0,
                seed: self.config.seed,
                accuracy: base_scores.accuracy,
                f_measure: base_scores.f_measure,
                silhouette: base_scores.silhouette,
            });
            for r in 1..self.config.runs {
                let seed = self.config.seed + r as u64;
                let clustering = self.cluster_run(fused, seed)?;
                let scores = self.score(fused, &clustering, truth.as_ref())?;
                all.push(RunScores {
                    run: r,
                    seed,
                    accuracy: scores.accuracy,
                    f_measure: scores.f_measure,
                    silhouette: scores.silhouette,
                });
            }
            let aggregate = AggregateScores {
                accuracy: stats(all.iter().map(|r| r.accuracy)),
                f_measure: stats(all.iter().map(|r| r.f_measure)),
                silhouette: stats(all.iter().map(|r| r.silhouette)),
            };
            (Some(all), Some(aggregate))
        } else {
            (None, None)
        };

        let report = PipelineReport {
            scores: base_scores,
            runs,
            aggregate,
        };
        let path = self.path("report.json");
        write_json(&path, &report)?;
        self.record("evaluate", &path, start, false);
        Ok((base, report))
    }

    /// Run everything and write the manifest.
    pub fn run(mut self) -> Result<PipelineOutput> {
        let corpus = self.corpus()?;
        let features = self.features(&corpus)?;
        let sims = self.similarities(&features)?;
        let fused = self.fused(&sims, corpus.doc_ids())?;
        let (clustering, report) = self.evaluate(&fused)?;
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config: self.config.clone(),
            stages: std::mem::take(&mut self.stages),
        };
        write_json(&self.path("run_manifest.json"), &manifest)?;
        Ok(PipelineOutput {
            fused,
            clustering,
            report,
            manifest,
        })
    }

    /// Coherence sweep over the configured candidate grid; writes the
    /// (K, score) table and returns the chosen count.
    pub fn sweep_topics(&mut self) -> Result<(usize, Vec<(usize, f64)>)> {
        if !self.config.sources.contains(&Source::Topic) {
            return Err(Error::InvalidConfig(
                "sweep-topics requires the topic source".into(),
            ));
        }
        let TopicSelection::Auto { grid } = self.config.topics.clone() else {
            return Err(Error::InvalidConfig(
                "sweep-topics requires a candidate grid (use --topics auto --topic-grid)".into(),
            ));
        };
        let corpus = self.corpus()?;
        let start = Instant::now();
        let base = LdaConfig {
            seed: self.config.seed,
            ..self.config.lda_config(2)
        };
        let (chosen, scores) =
            topic::select_topic_count(&corpus, &grid, &base, self.config.lda.top_n)
                .map_err(|e| e.in_stage("sweep-topics"))?;
        let path = self.path("topic_sweep.csv");
        let fp = self.features_fp(Source::Topic);
        cache::write_topic_sweep(&path, chosen, &scores, &fp)
            .map_err(|e| e.in_stage("sweep-topics"))?;
        self.record("sweep-topics", &path, start, false);
        Ok((chosen, scores))
    }

    /// One k-means + silhouette per candidate cluster count over the fused
    /// features; writes the (k, silhouette) table with the argmax marked.
    pub fn sweep_clusters(&mut self, counts: &[usize]) -> Result<Vec<(usize, f64)>> {
        if counts.is_empty() {
            return Err(Error::InvalidConfig("empty cluster-count range".into()));
        }
        let corpus = self.corpus()?;
        let features = self.features(&corpus)?;
        let sims = self.similarities(&features)?;
        let fused = self.fused(&sims, corpus.doc_ids())?;
        let start = Instant::now();
        let mut rows = Vec::with_capacity(counts.len());
        for &k in counts {
            let config = KMeansConfig {
                k,
                max_iter: self.config.kmeans.max_iter,
                epsilon: self.config.kmeans.epsilon,
                seed: self.config.seed,
            };
            let clustering =
                kmeans(fused.matrix.view(), &config).map_err(|e| e.in_stage("sweep-k"))?;
            let score = eval::silhouette(fused.matrix.view(), &clustering.labels)
                .map_err(|e| e.in_stage("sweep-k"))?;
            rows.push((k, score));
        }
        let best = rows
            .iter()
            .fold((rows[0].0, f64::NEG_INFINITY), |acc, &(k, s)| {
                if s > acc.1 {
                    (k, s)
                } else {
                    acc
                }
            })
            .0;
        let path = self.path("cluster_sweep.csv");
        let fp = cache::fingerprint(&format!("sweep-k|{}|{counts:?}", self.fused_fp()));
        cache::write_cluster_sweep(&path, best, &rows, &fp).map_err(|e| e.in_stage("sweep-k"))?;
        self.record("sweep-k", &path, start, false);
        Ok(rows)
    }
}

/// Fingerprint of everything the corpus stage depends on: the input bytes
/// (one file, or every file of a directory in name order), the format flag
/// and the stopword file bytes. Content-based so that editing an input in
/// place invalidates downstream caches.
fn corpus_content_fp(config: &PipelineConfig) -> Result<String> {
    let mut params = format!("corpus|{:?}|", config.format);
    let input = &config.input;
    if input.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(|e| Error::io(input, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(input, e))?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for path in entries {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            params.push_str(&path.file_name().unwrap_or_default().to_string_lossy());
            params.push('\0');
            params.push_str(&text);
            params.push('\0');
        }
    } else {
        let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
        params.push_str(&text);
    }
    params.push('|');
    if let Some(stopwords) = &config.stopwords {
        let text = std::fs::read_to_string(stopwords).map_err(|e| Error::io(stopwords, e))?;
        params.push_str(&text);
    }
    Ok(cache::fingerprint(&params))
}

fn stats<I: Iterator<Item = Option<f64>>>(values: I) -> Option<MetricStats> {
    let xs: Vec<f64> = values.flatten().collect();
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stdev = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MetricStats { mean, stdev })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Convenience wrapper: build and run a pipeline in one call.
pub fn run_pipeline(config: PipelineConfig) -> Result<PipelineOutput> {
    Pipeline::new(config)?.run()
}

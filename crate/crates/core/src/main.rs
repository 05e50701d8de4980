use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hmff::embed::EmbedMode;
use hmff::error::{Error, Result};
use hmff::features::Source;
use hmff::pipeline::{CorpusFormat, Pipeline, PipelineConfig, TopicSelection};

/// Document clustering by multisource feature fusion: TF-IDF, LDA topics
/// and distributed embeddings fused through similarity-matrix
/// eigendecomposition, clustered with k-means.
#[derive(Parser)]
#[command(name = "hmff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest and preprocess the corpus (writes corpus.csv)
    Preprocess(CommonArgs),
    /// Build per-source feature matrices
    Features(CommonArgs),
    /// Build per-source mutual similarity matrices
    Similarity(CommonArgs),
    /// Truncated eigendecomposition and fusion (writes fused.csv)
    Fuse(CommonArgs),
    /// k-means over the fused features (writes labels.csv, trace.csv)
    Cluster(CommonArgs),
    /// Cluster and score (writes report.json)
    Evaluate(CommonArgs),
    /// Full pipeline end to end (also writes run_manifest.json)
    Run(CommonArgs),
    /// Coherence sweep over topic-count candidates (writes topic_sweep.csv)
    SweepTopics(CommonArgs),
    /// Silhouette sweep over cluster counts (writes cluster_sweep.csv)
    SweepK(CommonArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Raw,
    Tokens,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EmbedArg {
    W2v,
    D2v,
}

#[derive(Args)]
struct CommonArgs {
    /// Input corpus: a file (one document per line) or a directory of files
    #[arg(long)]
    input: PathBuf,

    /// Input format: raw text or whitespace-separated tokens
    #[arg(long, value_enum, default_value = "tokens")]
    format: FormatArg,

    /// Enabled feature sources, comma-separated subset of vsm,topic,embed
    #[arg(long, default_value = "vsm,topic,embed")]
    sources: String,

    /// Embedding model
    #[arg(long = "embed", value_enum, default_value = "w2v")]
    embed: EmbedArg,

    /// Topic count: an integer, or "auto" to select by coherence
    #[arg(long, default_value = "5")]
    topics: String,

    /// Candidate grid lo:hi[:step] for --topics auto and sweep-topics
    #[arg(long = "topic-grid")]
    topic_grid: Option<String>,

    /// Truncated eigenvectors per source
    #[arg(long = "eigen-k", default_value_t = 3)]
    eigen_k: usize,

    /// Cluster count for k-means
    #[arg(long, default_value_t = 2)]
    clusters: usize,

    /// Cluster-count range lo:hi for sweep-k
    #[arg(long = "cluster-range")]
    cluster_range: Option<String>,

    /// Random seed
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Repeated k-means runs (seeds seed..seed+runs-1), aggregated in the report
    #[arg(long, default_value_t = 1)]
    runs: usize,

    /// Ground-truth file: doc_id,class CSV (enables accuracy and F-measure)
    #[arg(long)]
    truth: Option<PathBuf>,

    /// Output directory for stage caches and reports
    #[arg(long)]
    out: PathBuf,

    /// Stopword file, one word per line (raw format only)
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl CommonArgs {
    fn into_config(self) -> Result<PipelineConfig> {
        let sources = parse_sources(&self.sources)?;
        let topics = match self.topics.as_str() {
            "auto" => {
                let grid_spec = self.topic_grid.as_deref().ok_or_else(|| {
                    Error::InvalidConfig("--topics auto requires --topic-grid lo:hi[:step]".into())
                })?;
                TopicSelection::Auto {
                    grid: parse_grid(grid_spec)?,
                }
            }
            fixed => TopicSelection::Fixed(fixed.parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!(
                    "--topics must be an integer or \"auto\", got {fixed:?}"
                ))
            })?),
        };
        let mut config = PipelineConfig::new(self.input, self.out);
        config.format = match self.format {
            FormatArg::Raw => CorpusFormat::Raw,
            FormatArg::Tokens => CorpusFormat::Tokens,
        };
        config.sources = sources;
        config.embed_mode = match self.embed {
            EmbedArg::W2v => EmbedMode::W2v,
            EmbedArg::D2v => EmbedMode::D2v,
        };
        config.topics = topics;
        config.eigen_k = self.eigen_k;
        config.clusters = self.clusters;
        config.seed = self.seed;
        config.runs = self.runs;
        config.truth = self.truth;
        config.stopwords = self.stopwords;
        Ok(config)
    }
}

fn parse_sources(spec: &str) -> Result<Vec<Source>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Source::parse)
        .collect()
}

/// lo:hi[:step] inclusive grid.
fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidConfig(format!("bad grid {spec:?}, expected lo:hi[:step]"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let lo: usize = parts[0].parse().map_err(|_| bad())?;
    let hi: usize = parts[1].parse().map_err(|_| bad())?;
    let step: usize = if parts.len() == 3 {
        parts[2].parse().map_err(|_| bad())?
    } else {
        1
    };
    if step == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidConfig(format!("bad range {spec:?}, expected lo:hi"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.4}"))
}

fn print_scores(pipeline_report: &hmff::pipeline::PipelineReport) {
    let r = &pipeline_report.scores;
    println!(
        "accuracy={} f_measure={} silhouette={}",
        fmt_opt(r.accuracy),
        fmt_opt(r.f_measure),
        fmt_opt(r.silhouette)
    );
    if let Some(aggregate) = &pipeline_report.aggregate {
        for (name, stats) in [
            ("accuracy", &aggregate.accuracy),
            ("f_measure", &aggregate.f_measure),
            ("silhouette", &aggregate.silhouette),
        ] {
            if let Some(s) = stats {
                println!("{name} over runs: mean={:.4} stdev={:.4}", s.mean, s.stdev);
            }
        }
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            println!(
                "corpus: {} documents, {} terms, {} tokens",
                corpus.n(),
                corpus.term_count(),
                corpus.token_count()
            );
        }
        Command::Features(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            for fm in pipeline.features(&corpus)? {
                println!("features {}: {} x {}", fm.source, fm.n(), fm.dim());
            }
        }
        Command::Similarity(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            let features = pipeline.features(&corpus)?;
            for sim in pipeline.similarities(&features)? {
                println!(
                    "similarity {} ({}): {} x {}",
                    sim.source,
                    sim.measure.name(),
                    sim.n(),
                    sim.n()
                );
            }
        }
        Command::Fuse(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            let features = pipeline.features(&corpus)?;
            let sims = pipeline.similarities(&features)?;
            let fused = pipeline.fused(&sims, corpus.doc_ids())?;
            println!("fused: {} x {}", fused.n(), fused.h());
        }
        Command::Cluster(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            let features = pipeline.features(&corpus)?;
            let sims = pipeline.similarities(&features)?;
            let fused = pipeline.fused(&sims, corpus.doc_ids())?;
            let seed = pipeline.config().seed;
            let clustering = pipeline.cluster_run(&fused, seed)?;
            println!(
                "clustered {} documents into {} clusters in {} iterations (E = {:.6})",
                fused.n(),
                pipeline.config().clusters,
                clustering.iterations_used,
                clustering.objective_trace.last().copied().unwrap_or(0.0)
            );
        }
        Command::Evaluate(args) => {
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let corpus = pipeline.corpus()?;
            let features = pipeline.features(&corpus)?;
            let sims = pipeline.similarities(&features)?;
            let fused = pipeline.fused(&sims, corpus.doc_ids())?;
            let (_, report) = pipeline.evaluate(&fused)?;
            print_scores(&report);
        }
        Command::Run(args) => {
            let pipeline = Pipeline::new(args.into_config()?)?;
            let output = pipeline.run()?;
            print_scores(&output.report);
        }
        Command::SweepTopics(args) => {
            let grid_spec = args.topic_grid.clone().ok_or_else(|| {
                Error::InvalidConfig("sweep-topics requires --topic-grid lo:hi[:step]".into())
            })?;
            let grid = parse_grid(&grid_spec)?;
            let mut config = args.into_config()?;
            config.topics = TopicSelection::Auto { grid };
            let mut pipeline = Pipeline::new(config)?;
            let (chosen, scores) = pipeline.sweep_topics()?;
            for (k, score) in &scores {
                println!("K={k}: coherence {score:.6}");
            }
            println!("chosen topic count: {chosen}");
        }
        Command::SweepK(args) => {
            let range_spec = args.cluster_range.clone().ok_or_else(|| {
                Error::InvalidConfig("sweep-k requires --cluster-range lo:hi".into())
            })?;
            let counts = parse_range(&range_spec)?;
            let mut pipeline = Pipeline::new(args.into_config()?)?;
            let rows = pipeline.sweep_clusters(&counts)?;
            let mut best = rows[0];
            for &(k, s) in &rows {
                println!("k={k}: silhouette {s:.6}");
                if s > best.1 {
                    best = (k, s);
                }
            }
            println!("best cluster count: {} (silhouette {:.6})", best.0, best.1);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = err.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

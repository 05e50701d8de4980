//! Stage cache files: CSV with a one-line typed header.
//!
//! Every pipeline stage writes one file of the form
//! `#hmff,<kind>,key=value,...` followed by CSV rows. Floats are written in
//! Rust's shortest round-trip form, so parsing a cache file reproduces the
//! exact bit pattern that was written; warm-cache reruns are byte-identical
//! to cold runs. Headers carry a fingerprint of the parameters that produced
//! the file, letting loaders reject stale caches.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::cluster::Clustering;
use crate::corpus::TokenCorpus;
use crate::embed::{DocVectors, WordVectors};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Source};
use crate::fusion::FusedFeatures;
use crate::simmat::{Measure, SimilarityMatrix};
use crate::topic::{LdaConfig, TopicModel};

/// FNV-1a 64-bit hash of a parameter string, hex-encoded. Used to stamp
/// cache files with the configuration that produced them.
pub fn fingerprint(params: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in params.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips through from_str.
    format!("{v}")
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse {
        kind: "cache",
        path: path.display().to_string(),
        detail: format!("bad float {s:?}"),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct Header {
    kind: String,
    fields: HashMap<String, String>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn parse_header(line: &str, expected_kind: &str, path: &Path) -> Result<Header> {
    let bad = |detail: String| Error::Parse {
        kind: "cache",
        path: path.display().to_string(),
        detail,
    };
    let mut parts = line.split(',');
    if parts.next() != Some("#hmff") {
        return Err(bad("missing #hmff header".into()));
    }
    let kind = parts
        .next()
        .ok_or_else(|| bad("missing kind".into()))?
        .to_owned();
    if kind != expected_kind {
        return Err(bad(format!("expected {expected_kind} file, found {kind}")));
    }
    let mut fields = HashMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header field {part:?}")))?;
        fields.insert(k.to_owned(), v.to_owned());
    }
    Ok(Header { kind, fields })
}

impl Header {
    fn get(&self, key: &str, path: &Path) -> Result<&str> {
        self.fields.get(key).map(String::as_str).ok_or_else(|| Error::Parse {
            kind: "cache",
            path: path.display().to_string(),
            detail: format!("{} header missing {key}", self.kind),
        })
    }

    fn usize(&self, key: &str, path: &Path) -> Result<usize> {
        self.get(key, path)?.parse().map_err(|_| Error::Parse {
            kind: "cache",
            path: path.display().to_string(),
            detail: format!("bad {key} in header"),
        })
    }
}

/// Check that a cache file exists and carries the expected fingerprint.
pub fn cache_matches(path: &Path, kind: &str, fp: &str) -> bool {
    let Ok(text) = fs::read_to_string(path) else {
        return false;
    };
    let Some(first) = text.lines().next() else {
        return false;
    };
    match parse_header(first, kind, path) {
        Ok(h) => h.fields.get("fingerprint").map(String::as_str) == Some(fp),
        Err(_) => false,
    }
}

// --- corpus ---

pub fn write_corpus(path: &Path, corpus: &TokenCorpus, fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,corpus,n={},terms={},tokens={},fingerprint={fp}",
        corpus.n(),
        corpus.term_count(),
        corpus.token_count()
    )
    .unwrap();
    for doc in corpus.docs() {
        let tokens: Vec<&str> = doc.tokens.iter().map(|&t| corpus.token(t)).collect();
        writeln!(out, "{},{}", doc.id, tokens.join(" ")).unwrap();
    }
    write_file(path, &out)
}

pub fn read_corpus(path: &Path) -> Result<TokenCorpus> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "corpus", path)?;
    let n = header.usize("n", path)?;
    let mut docs = Vec::with_capacity(n);
    for line in &lines[1..] {
        if line.is_empty() {
            continue;
        }
        let (id, tokens) = line.split_once(',').ok_or_else(|| Error::Parse {
            kind: "cache",
            path: path.display().to_string(),
            detail: "corpus row without comma".into(),
        })?;
        docs.push((
            id.to_owned(),
            tokens.split_whitespace().map(str::to_owned).collect(),
        ));
    }
    let corpus = TokenCorpus::from_token_docs(docs)?;
    if corpus.n() != n {
        return Err(Error::Parse {
            kind: "cache",
            path: path.display().to_string(),
            detail: format!("expected {n} documents, found {}", corpus.n()),
        });
    }
    Ok(corpus)
}

// --- feature matrices ---

pub fn write_features(path: &Path, features: &FeatureMatrix, fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,features,source={},n={},dim={},fingerprint={fp}",
        features.source.name(),
        features.n(),
        features.dim()
    )
    .unwrap();
    for (i, row) in features.rows.rows().into_iter().enumerate() {
        out.push_str(&features.doc_ids[i]);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "features", path)?;
    let source = Source::parse(header.get("source", path)?)?;
    let n = header.usize("n", path)?;
    let dim = header.usize("dim", path)?;
    let mut rows = Array2::<f64>::zeros((n, dim));
    let mut doc_ids = Vec::with_capacity(n);
    for (i, line) in lines[1..].iter().filter(|l| !l.is_empty()).enumerate() {
        let mut parts = line.split(',');
        let id = parts.next().unwrap_or_default();
        doc_ids.push(id.to_owned());
        for j in 0..dim {
            let field = parts.next().ok_or_else(|| Error::Parse {
                kind: "cache",
                path: path.display().to_string(),
                detail: format!("row {i} has fewer than {dim} values"),
            })?;
            rows[[i, j]] = parse_f64(field, path)?;
        }
    }
    FeatureMatrix::new(source, rows, doc_ids)
}

// --- similarity matrices ---

pub fn write_similarity(path: &Path, sim: &SimilarityMatrix, fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,similarity,source={},measure={},n={},fingerprint={fp}",
        sim.source.name(),
        sim.measure.name(),
        sim.n()
    )
    .unwrap();
    for row in sim.values.rows() {
        let fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    write_file(path, &out)
}

pub fn read_similarity(path: &Path) -> Result<SimilarityMatrix> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "similarity", path)?;
    let source = Source::parse(header.get("source", path)?)?;
    let measure = Measure::parse(header.get("measure", path)?)?;
    let n = header.usize("n", path)?;
    let mut values = Array2::<f64>::zeros((n, n));
    for (i, line) in lines[1..].iter().filter(|l| !l.is_empty()).enumerate() {
        for (j, field) in line.split(',').enumerate() {
            values[[i, j]] = parse_f64(field, path)?;
        }
    }
    Ok(SimilarityMatrix {
        source,
        measure,
        values,
    })
}

// --- fused features ---

pub fn write_fused(path: &Path, fused: &FusedFeatures, fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,fused,n={},h={},fingerprint={fp}",
        fused.n(),
        fused.h()
    )
    .unwrap();
    let prov: Vec<String> = fused
        .provenance
        .iter()
        .map(|(s, j)| format!("{}:{}", s.name(), j))
        .collect();
    writeln!(out, "provenance,{}", prov.join(",")).unwrap();
    for (i, row) in fused.matrix.rows().into_iter().enumerate() {
        out.push_str(&fused.doc_ids[i]);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_fused(path: &Path) -> Result<FusedFeatures> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "fused", path)?;
    let n = header.usize("n", path)?;
    let h = header.usize("h", path)?;
    let bad = |detail: String| Error::Parse {
        kind: "cache",
        path: path.display().to_string(),
        detail,
    };
    let prov_line = lines.get(1).ok_or_else(|| bad("missing provenance row".into()))?;
    let mut prov_parts = prov_line.split(',');
    if prov_parts.next() != Some("provenance") {
        return Err(bad("second line must be the provenance row".into()));
    }
    let mut provenance = Vec::with_capacity(h);
    for part in prov_parts {
        let (source, idx) = part
            .split_once(':')
            .ok_or_else(|| bad(format!("bad provenance entry {part:?}")))?;
        provenance.push((
            Source::parse(source)?,
            idx.parse::<usize>()
                .map_err(|_| bad(format!("bad eigen index {idx:?}")))?,
        ));
    }
    let mut matrix = Array2::<f64>::zeros((n, h));
    let mut doc_ids = Vec::with_capacity(n);
    for (i, line) in lines[2..].iter().filter(|l| !l.is_empty()).enumerate() {
        let mut parts = line.split(',');
        doc_ids.push(parts.next().unwrap_or_default().to_owned());
        for j in 0..h {
            let field = parts
                .next()
                .ok_or_else(|| bad(format!("row {i} has fewer than {h} values")))?;
            matrix[[i, j]] = parse_f64(field, path)?;
        }
    }
    Ok(FusedFeatures {
        matrix,
        provenance,
        doc_ids,
    })
}

// --- clustering ---

pub fn write_labels(path: &Path, doc_ids: &[String], clustering: &Clustering, fp: &str) -> Result<()> {
    let k = clustering.labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,labels,n={},k={k},fingerprint={fp}",
        clustering.labels.len()
    )
    .unwrap();
    for (id, label) in doc_ids.iter().zip(&clustering.labels) {
        writeln!(out, "{id},{label}").unwrap();
    }
    write_file(path, &out)
}

pub fn read_labels(path: &Path) -> Result<Vec<(String, usize)>> {
    let lines = read_lines(path)?;
    parse_header(lines.first().map(String::as_str).unwrap_or(""), "labels", path)?;
    lines[1..]
        .iter()
        .filter(|l| !l.is_empty())
        .map(|line| {
            let (id, label) = line.split_once(',').ok_or_else(|| Error::Parse {
                kind: "cache",
                path: path.display().to_string(),
                detail: "labels row without comma".into(),
            })?;
            Ok((
                id.to_owned(),
                label.parse::<usize>().map_err(|_| Error::Parse {
                    kind: "cache",
                    path: path.display().to_string(),
                    detail: format!("bad cluster id {label:?}"),
                })?,
            ))
        })
        .collect()
}

pub fn write_trace(path: &Path, clustering: &Clustering, fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,trace,iterations={},fingerprint={fp}",
        clustering.iterations_used
    )
    .unwrap();
    for (i, e) in clustering.objective_trace.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, fmt_f64(*e)).unwrap();
    }
    write_file(path, &out)
}

// --- topic model dump ---

pub fn write_topic_model(path: &Path, model: &TopicModel, doc_ids: &[String], fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,topic-model,k={},v={},alpha={},beta={},iterations={},seed={},fingerprint={fp}",
        model.k(),
        model.vocab_size(),
        fmt_f64(model.config.alpha_value()),
        fmt_f64(model.config.beta),
        model.config.iterations,
        model.config.seed
    )
    .unwrap();
    for (i, row) in model.theta.rows().into_iter().enumerate() {
        out.push_str("theta,");
        out.push_str(&doc_ids[i]);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    for (t, row) in model.phi.rows().into_iter().enumerate() {
        let _ = write!(out, "phi,{t}");
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_topic_model(path: &Path) -> Result<TopicModel> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "topic-model", path)?;
    let k = header.usize("k", path)?;
    let v = header.usize("v", path)?;
    let alpha = parse_f64(header.get("alpha", path)?, path)?;
    let beta = parse_f64(header.get("beta", path)?, path)?;
    let iterations = header.usize("iterations", path)?;
    let seed = header.usize("seed", path)? as u64;
    let mut theta_rows: Vec<Vec<f64>> = Vec::new();
    let mut phi_rows: Vec<Vec<f64>> = Vec::new();
    for line in lines[1..].iter().filter(|l| !l.is_empty()) {
        let mut parts = line.split(',');
        let kind = parts.next().unwrap_or_default();
        let _key = parts.next();
        let values: Vec<f64> = parts
            .map(|f| parse_f64(f, path))
            .collect::<Result<Vec<_>>>()?;
        match kind {
            "theta" => theta_rows.push(values),
            "phi" => phi_rows.push(values),
            other => {
                return Err(Error::Parse {
                    kind: "cache",
                    path: path.display().to_string(),
                    detail: format!("unexpected row kind {other:?}"),
                })
            }
        }
    }
    let theta = rows_to_array(theta_rows, k, path)?;
    let phi = rows_to_array(phi_rows, v, path)?;
    Ok(TopicModel {
        theta,
        phi,
        config: LdaConfig {
            k,
            alpha: Some(alpha),
            beta,
            iterations,
            seed,
        },
    })
}

fn rows_to_array(rows: Vec<Vec<f64>>, width: usize, path: &Path) -> Result<Array2<f64>> {
    let n = rows.len();
    let mut out = Array2::<f64>::zeros((n, width));
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != width {
            return Err(Error::Parse {
                kind: "cache",
                path: path.display().to_string(),
                detail: format!("row {i}: expected {width} values, found {}", row.len()),
            });
        }
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

// --- embedding tables ---

pub fn write_word_vectors(path: &Path, wv: &WordVectors, fp: &str) -> Result<()> {
    write_embedding(path, "w2v", &wv.tokens, &wv.vectors, fp)
}

pub fn write_doc_vectors(path: &Path, dv: &DocVectors, fp: &str) -> Result<()> {
    write_embedding(path, "d2v", &dv.doc_ids, &dv.vectors, fp)
}

fn write_embedding(
    path: &Path,
    mode: &str,
    keys: &[String],
    vectors: &Array2<f64>,
    fp: &str,
) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "#hmff,embedding,mode={mode},rows={},dim={},fingerprint={fp}",
        vectors.nrows(),
        vectors.ncols()
    )
    .unwrap();
    for (i, row) in vectors.rows().into_iter().enumerate() {
        out.push_str(&keys[i]);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Read an embedding table: (mode, keys, vectors). Keys may contain commas
/// (pre-tokenized corpora), so values are taken from the row's tail.
pub fn read_embedding(path: &Path) -> Result<(String, Vec<String>, Array2<f64>)> {
    let lines = read_lines(path)?;
    let header = parse_header(lines.first().map(String::as_str).unwrap_or(""), "embedding", path)?;
    let mode = header.get("mode", path)?.to_owned();
    let rows = header.usize("rows", path)?;
    let dim = header.usize("dim", path)?;
    let mut keys = Vec::with_capacity(rows);
    let mut vectors = Array2::<f64>::zeros((rows, dim));
    for (i, line) in lines[1..].iter().filter(|l| !l.is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < dim + 1 {
            return Err(Error::Parse {
                kind: "cache",
                path: path.display().to_string(),
                detail: format!("embedding row {i} too short"),
            });
        }
        let split = fields.len() - dim;
        keys.push(fields[..split].join(","));
        for (j, field) in fields[split..].iter().enumerate() {
            vectors[[i, j]] = parse_f64(field, path)?;
        }
    }
    Ok((mode, keys, vectors))
}

// --- sweep tables ---

pub fn write_topic_sweep(path: &Path, chosen: usize, scores: &[(usize, f64)], fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "#hmff,topic-sweep,chosen={chosen},fingerprint={fp}").unwrap();
    for (k, score) in scores {
        writeln!(out, "{k},{}", fmt_f64(*score)).unwrap();
    }
    write_file(path, &out)
}

pub fn write_cluster_sweep(path: &Path, best: usize, rows: &[(usize, f64)], fp: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "#hmff,cluster-sweep,best={best},fingerprint={fp}").unwrap();
    for (k, score) in rows {
        writeln!(out, "{k},{}", fmt_f64(*score)).unwrap();
    }
    write_file(path, &out)
}

//! Cluster quality measures: silhouette (internal), F-measure and accuracy
//! (external, against labeled ground truth).
//!
//! Accuracy is computed as purity: each cluster is credited with its
//! majority class. F-measure weights each cluster's best class-wise F score
//! by cluster size.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth class per document id. Class ids are dense, assigned in
/// first-appearance order.
#[derive(Debug, Clone)]
pub struct LabeledGroundTruth {
    class_of: HashMap<String, usize>,
    class_names: Vec<String>,
}

impl LabeledGroundTruth {
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut class_of = HashMap::new();
        let mut class_names: Vec<String> = Vec::new();
        for (doc, class) in pairs {
            let class = class.into();
            let id = match class_names.iter().position(|c| *c == class) {
                Some(i) => i,
                None => {
                    class_names.push(class);
                    class_names.len() - 1
                }
            };
            class_of.insert(doc.into(), id);
        }
        LabeledGroundTruth {
            class_of,
            class_names,
        }
    }

    /// (doc_id, class) CSV, one pair per line. Lines starting with '#' are
    /// skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (doc, class) = line.split_once(',').ok_or_else(|| Error::Parse {
                kind: "ground truth",
                path: path.display().to_string(),
                detail: format!("line {}: expected doc_id,class", lineno + 1),
            })?;
            pairs.push((doc.trim().to_owned(), class.trim().to_owned()));
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput("ground truth file has no rows".into()));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Dense class ids aligned with `doc_ids`; every id must be covered.
    pub fn classes_for(&self, doc_ids: &[String]) -> Result<Vec<usize>> {
        doc_ids
            .iter()
            .map(|id| {
                self.class_of
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::TruthIncomplete(id.clone()))
            })
            .collect()
    }
}

/// Per-cluster diagnostics backing the external scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterDiagnostic {
    pub cluster: usize,
    pub size: usize,
    /// class with the largest overlap (purity credit)
    pub majority_class: String,
    /// class attaining the best F score for this cluster
    pub best_class: String,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Evaluation scores; external measures are present only when ground truth
/// was supplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<f64>,
    /// accuracy definition marker: purity (majority-class credit per cluster)
    pub accuracy_definition: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clusters: Vec<ClusterDiagnostic>,
}

/// Mean silhouette over all points, Euclidean distance in feature space.
/// Requires at least two non-empty clusters; singleton-cluster points score 0.
pub fn silhouette(features: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyInput("no points to evaluate".into()));
    }
    if features.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} labels",
            features.nrows(),
            n
        )));
    }
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue; // s(i) = 0
        }
        // mean distance to every cluster
        let mut dist_sum = vec![0.0f64; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = features
                .row(i)
                .iter()
                .zip(features.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist_sum[labels[j]] += d;
        }
        let a = dist_sum[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| dist_sum[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        total += if denom == 0.0 { 0.0 } else { (b - a) / denom };
    }
    Ok(total / n as f64)
}

/// Cluster x class contingency counts.
fn confusion(labels: &[usize], classes: &[usize]) -> Result<Vec<Vec<usize>>> {
    if labels.is_empty() || classes.is_empty() {
        return Err(Error::EmptyInput("empty clustering or ground truth".into()));
    }
    if labels.len() != classes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels vs {} classes",
            labels.len(),
            classes.len()
        )));
    }
    let k = labels.iter().copied().max().unwrap() + 1;
    let s = classes.iter().copied().max().unwrap() + 1;
    let mut m = vec![vec![0usize; s]; k];
    for (&r, &c) in labels.iter().zip(classes.iter()) {
        m[r][c] += 1;
    }
    Ok(m)
}

/// Size-weighted best F score per cluster:
/// F = sum_r (n_r / n) * max_s 2 P R / (P + R).
pub fn f_measure(labels: &[usize], classes: &[usize]) -> Result<f64> {
    let m = confusion(labels, classes)?;
    let n = labels.len() as f64;
    let class_sizes: Vec<usize> = transpose_sizes(&m);
    let mut total = 0.0;
    for row in &m {
        let n_r: usize = row.iter().sum();
        if n_r == 0 {
            continue;
        }
        let best = row
            .iter()
            .enumerate()
            .map(|(s, &n_rs)| pair_f(n_rs, n_r, class_sizes[s]))
            .fold(0.0f64, f64::max);
        total += (n_r as f64 / n) * best;
    }
    Ok(total)
}

fn pair_f(n_rs: usize, n_r: usize, n_s: usize) -> f64 {
    if n_rs == 0 {
        return 0.0;
    }
    let p = n_rs as f64 / n_r as f64;
    let r = n_rs as f64 / n_s as f64;
    2.0 * r * p / (r + p)
}

fn transpose_sizes(m: &[Vec<usize>]) -> Vec<usize> {
    let s = m.first().map_or(0, Vec::len);
    (0..s).map(|c| m.iter().map(|row| row[c]).sum()).collect()
}

/// Purity: each cluster credited with its majority class,
/// Ac = (1/n) sum_r max_s n_rs.
pub fn accuracy(labels: &[usize], classes: &[usize]) -> Result<f64> {
    let m = confusion(labels, classes)?;
    let n = labels.len() as f64;
    let credit: usize = m.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    Ok(credit as f64 / n)
}

/// Per-cluster diagnostics for the report.
pub fn cluster_diagnostics(
    labels: &[usize],
    classes: &[usize],
    class_names: &[String],
) -> Result<Vec<ClusterDiagnostic>> {
    let m = confusion(labels, classes)?;
    let class_sizes = transpose_sizes(&m);
    let mut out = Vec::new();
    for (r, row) in m.iter().enumerate() {
        let n_r: usize = row.iter().sum();
        if n_r == 0 {
            continue;
        }
        let majority = row
            .iter()
            .enumerate()
            .max_by_key(|&(_, &c)| c)
            .map(|(s, _)| s)
            .unwrap();
        let (best_s, best_f) = row
            .iter()
            .enumerate()
            .map(|(s, &n_rs)| (s, pair_f(n_rs, n_r, class_sizes[s])))
            .fold((0usize, -1.0f64), |acc, (s, f)| if f > acc.1 { (s, f) } else { acc });
        let p = m[r][best_s] as f64 / n_r as f64;
        let rec = if class_sizes[best_s] == 0 {
            0.0
        } else {
            m[r][best_s] as f64 / class_sizes[best_s] as f64
        };
        out.push(ClusterDiagnostic {
            cluster: r,
            size: n_r,
            majority_class: class_names[majority].clone(),
            best_class: class_names[best_s].clone(),
            precision: p,
            recall: rec,
            f: best_f,
        });
    }
    Ok(out)
}

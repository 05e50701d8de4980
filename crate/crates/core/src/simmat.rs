//! Mutual similarity matrices, one per feature source.
//!
//! VSM and embedding features use the Cosine-Euclidean measure: the mean of
//! cosine similarity and min-max-scaled inverted Euclidean distance. Topic
//! features use Jensen-Shannon similarity (1 - JS divergence, base-2 logs).
//! Every matrix is symmetric with unit diagonal and entries in [0, 1].

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Source};

/// Similarity measure used to build a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Cosine-Euclidean
    Ce,
    /// Jensen-Shannon
    Js,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Ce => "ce",
            Measure::Js => "js",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ce" => Ok(Measure::Ce),
            "js" => Ok(Measure::Js),
            other => Err(Error::InvalidConfig(format!("unknown measure {other:?}"))),
        }
    }

    /// Measure mandated for a source: JS for topics, CE otherwise.
    pub fn for_source(source: Source) -> Self {
        match source {
            Source::Topic => Measure::Js,
            Source::Vsm | Source::Embed => Measure::Ce,
        }
    }
}

/// n x n symmetric mutual similarity matrix for one source.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub source: Source,
    pub measure: Measure,
    pub values: Array2<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Cosine similarity. A zero vector yields 0 against any distinct pair;
/// self-pairs (the matrix diagonal) are pinned to 1 by the matrix builders.
pub fn cosine(u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot / (nu * nv)
}

/// Euclidean distance.
pub fn euclidean(u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Min-max scale inverted Euclidean distances: x = 1 - Euc, scaled over all
/// ordered pairs including the diagonal. The diagonal has Euc = 0, so the
/// maximum x is 1 and self-pairs scale to exactly 1. When all distances are
/// equal (max = min) every entry is defined as 1.
pub fn minmax_scale_euclidean(distances: &Array2<f64>) -> Result<Array2<f64>> {
    let n = distances.nrows();
    if n < 2 {
        return Err(Error::SingleDocument);
    }
    let x = distances.mapv(|d| 1.0 - d);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(Array2::from_elem((n, n), 1.0));
    }
    Ok(x.mapv(|v| (v - min) / (max - min)))
}

/// Cosine-Euclidean mutual similarity matrix for VSM or embedding features.
///
/// The cosine component is clamped below at 0: embedding vectors may point
/// in opposing directions, and the matrix contract requires entries in
/// [0, 1]. Non-negative features (VSM) are unaffected.
pub fn ce_similarity_matrix(features: &FeatureMatrix) -> Result<SimilarityMatrix> {
    if features.source == Source::Topic {
        return Err(Error::InvalidConfig(
            "Cosine-Euclidean similarity applies to vsm or embed features".into(),
        ));
    }
    let cos = cosine_matrix(features)?;
    let euc_s = scaled_euclidean_matrix(features)?;
    let n = features.n();
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            values[[i, j]] = 0.5 * (cos[[i, j]] + euc_s[[i, j]]);
        }
    }
    Ok(SimilarityMatrix {
        source: features.source,
        measure: Measure::Ce,
        values,
    })
}

/// The clamped-cosine component of the CE matrix.
pub fn cosine_matrix(features: &FeatureMatrix) -> Result<Array2<f64>> {
    let n = features.n();
    if n < 2 {
        return Err(Error::SingleDocument);
    }
    let mut cos = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        cos[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let c = cosine(features.rows.row(i), features.rows.row(j))
                .clamp(0.0, 1.0);
            cos[[i, j]] = c;
            cos[[j, i]] = c;
        }
    }
    Ok(cos)
}

/// The min-max-scaled Euclidean component of the CE matrix.
pub fn scaled_euclidean_matrix(features: &FeatureMatrix) -> Result<Array2<f64>> {
    let n = features.n();
    if n < 2 {
        return Err(Error::SingleDocument);
    }
    let mut dist = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(features.rows.row(i), features.rows.row(j));
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    minmax_scale_euclidean(&dist)
}

/// Jensen-Shannon divergence with base-2 logs; in [0, 1] for distributions.
pub fn js_divergence(p: ArrayView1<f64>, q: ArrayView1<f64>) -> f64 {
    let kl_to_mid = |a: ArrayView1<f64>, b: ArrayView1<f64>| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(&x, &y)| {
                if x == 0.0 {
                    0.0
                } else {
                    let m = 0.5 * (x + y);
                    x * (x / m).log2()
                }
            })
            .sum()
    };
    0.5 * kl_to_mid(p, q) + 0.5 * kl_to_mid(q, p)
}

/// Jensen-Shannon mutual similarity matrix for topic features: 1 - JS.
pub fn js_similarity_matrix(features: &FeatureMatrix) -> Result<SimilarityMatrix> {
    if features.source != Source::Topic {
        return Err(Error::InvalidConfig(
            "Jensen-Shannon similarity applies to topic features".into(),
        ));
    }
    let n = features.n();
    for (i, row) in features.rows.rows().into_iter().enumerate() {
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|&v| v < 0.0) {
            return Err(Error::NotADistribution(i));
        }
    }
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        values[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let js = js_divergence(features.rows.row(i), features.rows.row(j));
            let sim = (1.0 - js).clamp(0.0, 1.0);
            values[[i, j]] = sim;
            values[[j, i]] = sim;
        }
    }
    Ok(SimilarityMatrix {
        source: Source::Topic,
        measure: Measure::Js,
        values,
    })
}

/// Build the similarity matrix a source mandates: CE for vsm/embed, JS for
/// topic features.
pub fn similarity_matrix(features: &FeatureMatrix) -> Result<SimilarityMatrix> {
    match Measure::for_source(features.source) {
        Measure::Ce => ce_similarity_matrix(features),
        Measure::Js => js_similarity_matrix(features),
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn feature_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        let value = -3.0f64..3.0f64;
        let dims = 1usize..5;
        (2usize..7, dims).prop_flat_map(move |(n, dim)| {
            proptest::collection::vec(proptest::collection::vec(value.clone(), dim), n)
        })
    }

    fn assert_sim_contract(values: &Array2<f64>) {
        let n = values.nrows();
        for i in 0..n {
            assert_eq!(values[[i, i]], 1.0);
            for j in 0..n {
                assert!((0.0..=1.0).contains(&values[[i, j]]));
                assert!((values[[i, j]] - values[[j, i]]).abs() <= 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ce_matrix_contract(rows in feature_rows()) {
            let n = rows.len();
            let dim = rows[0].len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let rows = Array2::from_shape_vec((n, dim), flat).unwrap();
            let ids = (0..n).map(|i| i.to_string()).collect();
            let fmx = FeatureMatrix::new(Source::Embed, rows, ids).unwrap();
            let sim = ce_similarity_matrix(&fmx).unwrap();
            assert_sim_contract(&sim.values);
        }

        #[test]
        fn js_matrix_contract(rows in feature_rows()) {
            let n = rows.len();
            let dim = rows[0].len();
            // turn arbitrary rows into distributions
            let flat: Vec<f64> = rows
                .into_iter()
                .flat_map(|row| {
                    let sum: f64 = row.iter().map(|v| v.abs() + 1e-3).sum();
                    row.into_iter()
                        .map(|v| (v.abs() + 1e-3) / sum)
                        .collect::<Vec<_>>()
                })
                .collect();
            let rows = Array2::from_shape_vec((n, dim), flat).unwrap();
            let ids = (0..n).map(|i| i.to_string()).collect();
            let fmx = FeatureMatrix::new(Source::Topic, rows, ids).unwrap();
            let sim = js_similarity_matrix(&fmx).unwrap();
            assert_sim_contract(&sim.values);
        }
    }
}

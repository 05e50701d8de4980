//! Seeded k-means over fused (or any) feature rows.
//!
//! Initial centers are k distinct documents sampled without replacement.
//! Assignment uses squared Euclidean distance with ties going to the lowest
//! cluster id; centers are cluster means. The loop stops when assignments
//! stabilize, when the objective change falls within epsilon, or at max_iter.
//! A cluster left empty after an update is reseeded to the point currently
//! farthest from its own center, and the event is recorded.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 2,
            max_iter: 300,
            epsilon: 1e-6,
            seed: 1,
        }
    }
}

/// A cluster reseed event: iteration and the cluster that went empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReseedEvent {
    pub iteration: usize,
    pub cluster: usize,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centers: Array2<f64>,
    /// objective E per completed iteration
    pub objective_trace: Vec<f64>,
    pub iterations_used: usize,
    pub reseeds: Vec<ReseedEvent>,
}

pub fn kmeans(features: ArrayView2<f64>, config: &KMeansConfig) -> Result<Clustering> {
    let n = features.nrows();
    let dim = features.ncols();
    if config.k < 1 || config.max_iter < 1 || config.epsilon < 0.0 {
        return Err(Error::InvalidConfig(
            "k-means requires k >= 1, max_iter >= 1, epsilon >= 0".into(),
        ));
    }
    if n < config.k {
        return Err(Error::TooFewPoints {
            points: n,
            k: config.k,
        });
    }
    for ((r, c), &v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }

    let k = config.k;
    let mut rng = Rng::from_seed(config.seed);
    let init = rng.sample_distinct(n, k);
    let mut centers = Array2::<f64>::zeros((k, dim));
    for (c, &doc) in init.iter().enumerate() {
        centers.row_mut(c).assign(&features.row(doc));
    }

    let mut labels = vec![0usize; n];
    let mut prev_labels: Option<Vec<usize>> = None;
    let mut prev_e: Option<f64> = None;
    let mut trace = Vec::new();
    let mut reseeds = Vec::new();

    for iteration in 1..=config.max_iter {
        assign(features, &centers.view(), &mut labels);
        if prev_labels.as_deref() == Some(&labels) {
            break;
        }

        // update: centers become cluster means (ascending index sums)
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for (i, &label) in labels.iter().enumerate() {
            counts[label] += 1;
            let row = features.row(i);
            for d in 0..dim {
                sums[[label, d]] += row[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    centers[[c, d]] = sums[[c, d]] / counts[c] as f64;
                }
            }
        }
        // reseed empty clusters to the worst-fit point
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut taken = vec![false; n];
            for &c in &empties {
                let mut far = None;
                let mut far_d = f64::NEG_INFINITY;
                for i in 0..n {
                    if taken[i] {
                        continue;
                    }
                    let d = sq_dist(features.row(i), centers.row(labels[i]));
                    if d > far_d {
                        far_d = d;
                        far = Some(i);
                    }
                }
                let far = far.expect("n >= k guarantees a reseed candidate");
                taken[far] = true;
                centers.row_mut(c).assign(&features.row(far));
                reseeds.push(ReseedEvent { iteration, cluster: c });
            }
        }

        let e: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| sq_dist(features.row(i), centers.row(label)))
            .sum();
        trace.push(e);

        if let Some(pe) = prev_e {
            if (pe - e).abs() <= config.epsilon {
                break;
            }
        }
        prev_labels = Some(labels.clone());
        prev_e = Some(e);
    }

    Ok(Clustering {
        iterations_used: trace.len(),
        labels,
        centers,
        objective_trace: trace,
        reseeds,
    })
}

fn assign(features: ArrayView2<f64>, centers: &ArrayView2<f64>, labels: &mut [usize]) {
    for (i, label) in labels.iter_mut().enumerate() {
        let row = features.row(i);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.rows().into_iter().enumerate() {
            let d = sq_dist(row, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        *label = best;
    }
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

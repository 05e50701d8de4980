//! Truncated eigendecomposition of similarity matrices and feature fusion.
//!
//! Each n x n similarity matrix is reduced to its top-k eigenpairs (largest
//! algebraic eigenvalues). The fused feature matrix concatenates the
//! eigenvalue-weighted unit eigenvectors of every source in a fixed order,
//! giving an n x (k * sources) matrix for clustering.
//!
//! Solver: symmetric Lanczos with full reorthogonalization, falling back to
//! dense cyclic Jacobi for n <= 64. Eigenvector signs are fixed so that the
//! entry of largest absolute value is non-negative, making output
//! deterministic.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::features::Source;
use crate::rng::Rng;
use crate::simmat::SimilarityMatrix;

/// Matrices at or below this order are solved densely.
const DENSE_CUTOFF: usize = 64;
/// Ritz residual target inside the Lanczos loop.
const LANCZOS_TOL: f64 = 1e-10;
/// Contract bound on final residuals, relative to max(1, |lambda|).
const RESIDUAL_BOUND: f64 = 1e-8;

/// Top-k eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// n x k, unit-norm columns, sign-fixed.
    pub vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }
}

/// Fused feature matrix: eigenvalue-weighted eigenvectors of every source.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeatures {
    /// n x h with h = k * number of sources
    pub matrix: Array2<f64>,
    /// per-column (source, eigen index), eigen index 0-based ascending
    pub provenance: Vec<(Source, usize)>,
    pub doc_ids: Vec<String>,
}

impl FusedFeatures {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn h(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Top-k eigenpairs of a similarity matrix, largest algebraic eigenvalues
/// first. Fails on asymmetric input and when the solver cannot reach the
/// residual bound.
pub fn truncated_eig(sim: &SimilarityMatrix, k: usize) -> Result<EigenPairs> {
    top_k_eigenpairs(sim.values.view(), k)
}

/// As `truncated_eig` but on a raw symmetric matrix.
pub fn top_k_eigenpairs(a: ArrayView2<f64>, k: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidConfig(format!(
            "eigen rank k={k} must satisfy 1 <= k <= n={n}"
        )));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    if asym > 1e-9 {
        return Err(Error::NotSymmetric(asym));
    }
    // Symmetrize last-bit noise so both solvers see one exact input.
    let mut sym = a.to_owned();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (sym[[i, j]] + sym[[j, i]]);
            sym[[i, j]] = v;
            sym[[j, i]] = v;
        }
    }

    let (values, vectors) = if n <= DENSE_CUTOFF {
        let (vals, vecs) = jacobi_eigh(&sym)?;
        (vals[..k].to_vec(), vecs.slice(ndarray::s![.., ..k]).to_owned())
    } else {
        lanczos_top_k(&sym, k)?
    };

    let mut pairs = EigenPairs { values, vectors };
    fix_signs(&mut pairs.vectors);
    check_residuals(&sym, &pairs)?;
    Ok(pairs)
}

/// Concatenate eigenvalue-weighted eigenvectors in the given source order.
/// All sources must share n and k.
pub fn fuse(eigs: &[(Source, EigenPairs)], doc_ids: Vec<String>) -> Result<FusedFeatures> {
    if eigs.is_empty() {
        return Err(Error::EmptyInput("no eigenpairs to fuse".into()));
    }
    let n = eigs[0].1.n();
    let k = eigs[0].1.k();
    for (source, pairs) in eigs {
        if pairs.n() != n || pairs.k() != k {
            return Err(Error::DimensionMismatch(format!(
                "source {source}: {}x{} eigenpairs, expected {n}x{k}",
                pairs.n(),
                pairs.k()
            )));
        }
    }
    if doc_ids.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} doc ids for {n} rows",
            doc_ids.len()
        )));
    }
    let h = k * eigs.len();
    let mut matrix = Array2::<f64>::zeros((n, h));
    let mut provenance = Vec::with_capacity(h);
    for (block, (source, pairs)) in eigs.iter().enumerate() {
        for j in 0..k {
            let lambda = pairs.values[j];
            let col = block * k + j;
            for i in 0..n {
                matrix[[i, col]] = lambda * pairs.vectors[[i, j]];
            }
            provenance.push((*source, j));
        }
    }
    Ok(FusedFeatures {
        matrix,
        provenance,
        doc_ids,
    })
}

/// Make each column's largest-magnitude entry non-negative (first index on
/// ties). k-means downstream is sign-sensitive, so this pins the output.
fn fix_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.axis_iter_mut(Axis(1)) {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

fn check_residuals(a: &Array2<f64>, pairs: &EigenPairs) -> Result<()> {
    for (j, &lambda) in pairs.values.iter().enumerate() {
        let x = pairs.vectors.column(j);
        let ax = a.dot(&x);
        let resid = (&ax - &(&x * lambda)).mapv(|v| v * v).sum().sqrt();
        if resid > RESIDUAL_BOUND * lambda.abs().max(1.0) {
            return Err(Error::ConvergenceFailure(10 * a.nrows()));
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns all
/// eigenvalues descending with matching unit eigenvector columns.
pub fn jacobi_eigh(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let max_sweeps = 100;

    for sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= 1e-14 * frobenius(&m).max(1e-300) {
            let mut order: Vec<usize> = (0..n).collect();
            let diag: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
            order.sort_by(|&x, &y| diag[y].partial_cmp(&diag[x]).unwrap());
            let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
            let mut vectors = Array2::<f64>::zeros((n, n));
            for (new, &old) in order.iter().enumerate() {
                for r in 0..n {
                    vectors[[r, new]] = v[[r, old]];
                }
            }
            return Ok((values, vectors));
        }
        let _ = sweep;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let h = m[[q, q]] - m[[p, p]];
                let t = if apq.abs() * 100.0 + h.abs() == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let app = m[[p, p]];
                let aqq = m[[q, q]];
                m[[p, p]] = app - t * apq;
                m[[q, q]] = aqq + t * apq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let mrp = m[[r, p]];
                        let mrq = m[[r, q]];
                        m[[r, p]] = c * mrp - s * mrq;
                        m[[p, r]] = m[[r, p]];
                        m[[r, q]] = s * mrp + c * mrq;
                        m[[q, r]] = m[[r, q]];
                    }
                }
                for r in 0..n {
                    let vrp = v[[r, p]];
                    let vrq = v[[r, q]];
                    v[[r, p]] = c * vrp - s * vrq;
                    v[[r, q]] = s * vrp + c * vrq;
                }
            }
        }
    }
    Err(Error::ConvergenceFailure(max_sweeps))
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|&v| v * v).sum::<f64>().sqrt()
}

/// Symmetric Lanczos with full reorthogonalization. Grows the Krylov basis
/// until the top-k Ritz residual bounds fall below tolerance (or the basis
/// spans the whole space), then returns the converged eigenpair estimates.
pub fn lanczos_top_k(a: &Array2<f64>, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    let cap = 10 * n;

    // Deterministic start vector from a fixed internal seed.
    let mut rng = Rng::from_seed(0x1b873593);
    let mut v = Array1::from_shape_fn(n, |_| rng.gen_f64_range(-1.0, 1.0));
    normalize(&mut v);

    let mut basis: Vec<Array1<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut steps = 0usize;

    loop {
        steps += 1;
        if steps > cap {
            return Err(Error::ConvergenceFailure(cap));
        }
        let j = basis.len() - 1;
        let vj = &basis[j];
        let mut w = a.dot(vj);
        if j > 0 {
            w = &w - &(&basis[j - 1] * betas[j - 1]);
        }
        let alpha = vj.dot(&w);
        w = &w - &(vj * alpha);
        alphas.push(alpha);
        // Full reorthogonalization, applied twice.
        for _ in 0..2 {
            for u in &basis {
                let proj = u.dot(&w);
                w = &w - &(u * proj);
            }
        }
        let beta = w.dot(&w).sqrt();
        let m = basis.len();

        let done_space = m == n;
        let breakdown = beta <= 1e-12;

        if m >= k && (done_space || breakdown || m % 5 == 0 || m >= 2 * k + 10) {
            if let Some(result) = ritz_converged(a, &alphas, &betas, &basis, k, beta, done_space)? {
                return Ok(result);
            }
        }

        if done_space {
            // Basis spans the space; force-extract whatever Ritz pairs exist.
            if let Some(result) = ritz_converged(a, &alphas, &betas, &basis, k, 0.0, true)? {
                return Ok(result);
            }
            return Err(Error::ConvergenceFailure(cap));
        }

        if breakdown {
            // Invariant subspace found early: continue with a fresh direction
            // orthogonal to the current basis (T becomes block diagonal).
            let mut next = fresh_direction(n, &basis, &mut rng);
            normalize(&mut next);
            betas.push(0.0);
            basis.push(next);
        } else {
            betas.push(beta);
            basis.push(w / beta);
        }
    }
}

/// Solve the tridiagonal Ritz problem; when the top-k residual estimates are
/// within tolerance (or the basis is complete), assemble the eigenvectors.
#[allow(clippy::too_many_arguments)]
fn ritz_converged(
    a: &Array2<f64>,
    alphas: &[f64],
    betas: &[f64],
    basis: &[Array1<f64>],
    k: usize,
    beta_last: f64,
    force: bool,
) -> Result<Option<(Vec<f64>, Array2<f64>)>> {
    let m = alphas.len();
    let mut t = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alphas[i];
        if i + 1 < m {
            t[[i, i + 1]] = betas[i];
            t[[i + 1, i]] = betas[i];
        }
    }
    let (theta, s) = jacobi_eigh(&t)?;
    let kk = k.min(m);
    if !force {
        let ok = (0..kk).all(|i| {
            let bound = (beta_last * s[[m - 1, i]]).abs();
            bound <= LANCZOS_TOL * theta[i].abs().max(1.0)
        });
        if !ok {
            return Ok(None);
        }
    }
    let n = a.nrows();
    let mut x = Array2::<f64>::zeros((n, kk));
    for col in 0..kk {
        let mut acc = Array1::<f64>::zeros(n);
        for (row, u) in basis.iter().enumerate().take(m) {
            acc = &acc + &(u * s[[row, col]]);
        }
        normalize(&mut acc);
        for r in 0..n {
            x[[r, col]] = acc[r];
        }
    }
    Ok(Some((theta[..kk].to_vec(), x)))
}

fn fresh_direction(n: usize, basis: &[Array1<f64>], rng: &mut Rng) -> Array1<f64> {
    for _ in 0..32 {
        let mut cand = Array1::from_shape_fn(n, |_| rng.gen_f64_range(-1.0, 1.0));
        for u in basis {
            let proj = u.dot(&cand);
            cand = &cand - &(u * proj);
        }
        if cand.dot(&cand).sqrt() > 1e-8 {
            return cand;
        }
    }
    // Orthogonal complement of a proper subspace is never empty; random
    // vectors failing 32 times would mean numerics are already broken.
    unreachable!("could not find a direction orthogonal to the Lanczos basis")
}

fn normalize(v: &mut Array1<f64>) {
    let norm = v.dot(v).sqrt();
    if norm > 0.0 {
        v.mapv_inplace(|x| x / norm);
    }
}

//! Independent reference implementations used as test oracles. They share
//! no code with the library beyond the matrix container.
#![allow(dead_code)]

use exactnmf::{DenseMatrix, RandomSource};

/// Dense SVD by one-sided Jacobi rotations on the columns of a copy of `x`
/// (or of `xᵀ` when `x` is wide). Returns singular values in decreasing
/// order with the matching left and right singular vectors.
pub struct OracleSvd {
    pub sigma: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

pub fn jacobi_svd(x: &DenseMatrix) -> OracleSvd {
    let (m, n) = x.shape();
    if m < n {
        let t = jacobi_svd(&x.transpose());
        return OracleSvd { sigma: t.sigma, u: t.v, v: t.u };
    }
    // columns of a, accumulated rotations in v
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|t| t * t).sum();
                let beta: f64 = a[q].iter().map(|t| t * t).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(s, t)| s * t).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut a, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (bp, bq) = (*xp, *xq);
                        *xp = c * bp - s * bq;
                        *xq = s * bp + c * bq;
                    }
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = a.iter().map(|c| c.iter().map(|t| t * t).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = order
        .iter()
        .map(|&j| {
            let s = norms[j];
            a[j].iter().map(|t| if s > 0.0 { t / s } else { 0.0 }).collect()
        })
        .collect();
    let v = order.iter().map(|&j| v[j].clone()).collect();
    OracleSvd { sigma, u, v }
}

/// Rank as the count of singular values above `rel_tol · σ₁`.
pub fn oracle_rank(x: &DenseMatrix, rel_tol: f64) -> usize {
    let s = jacobi_svd(x).sigma;
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// `‖X − WH‖_F / ‖X‖_F` by explicit triple loop.
pub fn naive_relative_error(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> f64 {
    let (m, n) = x.shape();
    let r = w.cols();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..m {
        for j in 0..n {
            let mut p = 0.0;
            for k in 0..r {
                p += w[(i, k)] * h[(k, j)];
            }
            num += (x[(i, j)] - p).powi(2);
            den += x[(i, j)].powi(2);
        }
    }
    (num / den).sqrt()
}

pub fn uniform_matrix(rows: usize, cols: usize, rng: &mut RandomSource) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform())
}

/// Uniform on (0, 1], so products of these are entrywise positive.
pub fn positive_matrix(rows: usize, cols: usize, rng: &mut RandomSource) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform_nonzero())
}

/// Naive product, for building exact instances.
pub fn product(w: &DenseMatrix, h: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(w.rows(), h.cols(), |i, j| (0..w.cols()).map(|k| w[(i, k)] * h[(k, j)]).sum())
}

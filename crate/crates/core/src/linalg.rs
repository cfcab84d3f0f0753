//! Norms, residuals, singular values and Kronecker products.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, DenseMatrix};

/// Default cap on the number of entries a Kronecker product may produce.
pub const KRONECKER_ELEMENT_CAP: usize = 1 << 24;

/// Default relative cutoff for [`numeric_rank`].
pub const RANK_TOLERANCE: f64 = 1e-9;

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    // Scaled accumulation so that huge or tiny entries neither overflow nor vanish.
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / scale;
    let ss: f64 = m.data().iter().map(|v| (v * inv) * (v * inv)).sum();
    scale * ss.sqrt()
}

fn check_factor_shapes(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<()> {
    if w.rows() != x.rows() || h.cols() != x.cols() || w.cols() != h.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X is {:?} but W is {:?} and H is {:?}",
            x.shape(),
            w.shape(),
            h.shape()
        )));
    }
    Ok(())
}

/// `‖X − W·H‖_F`, computed row by row without materializing `W·H`.
pub fn residual_norm(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_factor_shapes(x, w, h)?;
    Ok(residual_norm_unchecked(x, w, h))
}

pub(crate) fn residual_norm_unchecked(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> f64 {
    let n = x.cols();
    let mut buf = vec![0.0; n];
    let mut ss = 0.0;
    for i in 0..x.rows() {
        buf.copy_from_slice(x.row(i));
        for (k, &wik) in w.row(i).iter().enumerate() {
            if wik != 0.0 {
                axpy(-wik, h.row(k), &mut buf);
            }
        }
        ss += dot(&buf, &buf);
    }
    ss.sqrt()
}

/// `‖X − W·H‖_F / ‖X‖_F`.
pub fn relative_error(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_factor_shapes(x, w, h)?;
    let norm = frobenius_norm(x);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(residual_norm_unchecked(x, w, h) / norm)
}

/// Dominant singular value with its unit left and right singular vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTriplet {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn apply(x: &DenseMatrix, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(x.row(i), v);
    }
}

fn apply_t(x: &DenseMatrix, u: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &ui) in u.iter().enumerate() {
        axpy(ui, x.row(i), out);
    }
}

/// Power iteration on `XᵀX` from the normalized all-ones vector.
///
/// On return `X·v = σ·u` holds to rounding, and the iteration stops once the
/// companion equation satisfies `‖Xᵀu − σ·v‖₂ ≤ tol·σ`. When `max_iters` runs
/// out the best iterate is carried inside [`Error::NoConvergence`].
pub fn leading_singular_triplet(
    x: &DenseMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<SingularTriplet> {
    let (m, n) = x.shape();
    if x.max_abs() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut u = vec![0.0; m];
    apply(x, &v, &mut u);
    if dot(&u, &u) == 0.0 {
        // The all-ones start is orthogonal to the row space; fall back to the
        // coordinate direction of the heaviest column.
        let best = (0..n)
            .max_by(|&a, &b| {
                let ca: f64 = (0..m).map(|i| x[(i, a)].powi(2)).sum();
                let cb: f64 = (0..m).map(|i| x[(i, b)].powi(2)).sum();
                ca.total_cmp(&cb)
            })
            .unwrap_or(0);
        v.fill(0.0);
        v[best] = 1.0;
    }

    let mut next_v = vec![0.0; n];
    let mut best: Option<(f64, SingularTriplet)> = None;
    for iter in 1..=max_iters {
        apply(x, &v, &mut u);
        let sigma = normalize(&mut u);
        apply_t(x, &u, &mut next_v);
        let resid = next_v
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - sigma * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let candidate = SingularTriplet {
            sigma,
            u: u.clone(),
            v: v.clone(),
            iterations: iter,
        };
        if resid <= tol * sigma {
            return Ok(candidate);
        }
        let rel = resid / sigma;
        if best.as_ref().is_none_or(|(r, _)| rel < *r) {
            best = Some((rel, candidate));
        }
        normalize(&mut next_v);
        std::mem::swap(&mut v, &mut next_v);
    }
    let best = best.map(|(_, t)| t).unwrap_or(SingularTriplet {
        sigma: 0.0,
        u,
        v,
        iterations: 0,
    });
    Err(Error::NoConvergence {
        iters: max_iters,
        best: Box::new(best),
    })
}

/// All singular values in descending order via one-sided Jacobi rotations.
pub fn singular_values(x: &DenseMatrix) -> Vec<f64> {
    // Orthogonalize the columns of whichever orientation has fewer columns.
    let a = if x.cols() <= x.rows() {
        x.transpose()
    } else {
        x.clone()
    };
    // Each row of `a` is one column vector being orthogonalized.
    let k = a.rows();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|i| a.row(i).to_vec()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a0, b0) = (*xp, *xq);
                    *xp = c * a0 - s * b0;
                    *xq = s * a0 + c * b0;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numeric_rank(x: &DenseMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(x);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * top).count()
}

pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    kronecker_with_cap(a, b, KRONECKER_ELEMENT_CAP)
}

pub fn kronecker_with_cap(a: &DenseMatrix, b: &DenseMatrix, cap: usize) -> Result<DenseMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some_and(|e| e <= cap) => (r, c),
        _ => {
            return Err(Error::SizeOverflow {
                rows: a.rows().saturating_mul(b.rows()),
                cols: a.cols().saturating_mul(b.cols()),
                cap,
            })
        }
    };
    let (bm, bn) = b.shape();
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| {
        a[(i / bm, j / bn)] * b[(i % bm, j % bn)]
    }))
}

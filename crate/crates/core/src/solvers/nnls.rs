//! Lawson–Hanson active-set NNLS on the normal equations.

/// Result of one NNLS solve. `stalled` is set when the pivot budget ran out or
/// a passive subsystem could not be factored; `x` is then the last feasible
/// iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    pub pivots: usize,
    pub stalled: bool,
}

/// In-place Cholesky of the `idx × idx` principal submatrix of the row-major
/// `r×r` matrix `g`. Returns the lower factor packed row-major, or `None` when
/// a pivot is not positive.
fn cholesky_sub(g: &[f64], r: usize, idx: &[usize]) -> Option<Vec<f64>> {
    let k = idx.len();
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[idx[i] * r + idx[j]];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], k: usize, rhs: &mut [f64]) {
    for i in 0..k {
        let mut s = rhs[i];
        for p in 0..i {
            s -= l[i * k + p] * rhs[p];
        }
        rhs[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for p in (i + 1)..k {
            s -= l[p * k + i] * rhs[p];
        }
        rhs[i] = s / l[i * k + i];
    }
}

/// Estimate of the 2-norm condition number of the SPD matrix `g` from its
/// Cholesky pivots; infinite when the factorization breaks down.
pub fn condition_estimate(g: &[f64], r: usize) -> f64 {
    let all: Vec<usize> = (0..r).collect();
    match cholesky_sub(g, r, &all) {
        None => f64::INFINITY,
        Some(l) => {
            let max_diag = (0..r).map(|i| g[i * r + i]).fold(0.0, f64::max);
            let min_piv = (0..r).map(|i| l[i * r + i].powi(2)).fold(f64::INFINITY, f64::min);
            max_diag / min_piv
        }
    }
}

/// Minimizes `xᵀGx − 2bᵀx` over `x ≥ 0` for symmetric positive semidefinite
/// `G` (row-major `r×r`), i.e. `min ‖Wx − y‖` with `G = WᵀW`, `b = Wᵀy`.
pub fn nnls_gram(g: &[f64], b: &[f64], max_pivots: usize) -> NnlsSolution {
    let r = b.len();
    debug_assert_eq!(g.len(), r * r);
    let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-11 * scale.max(f64::MIN_POSITIVE);

    let mut x = vec![0.0; r];
    let mut passive = vec![false; r];
    let mut w = b.to_vec();
    let mut pivots = 0;
    let mut stalled = false;

    let gradient = |x: &[f64], w: &mut [f64]| {
        for i in 0..r {
            w[i] = b[i] - (0..r).map(|j| g[i * r + j] * x[j]).sum::<f64>();
        }
    };

    'outer: loop {
        let candidate = (0..r)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &c| w[a].total_cmp(&w[c]));
        let Some(t) = candidate else { break };
        if pivots >= max_pivots {
            stalled = true;
            break;
        }
        pivots += 1;
        passive[t] = true;

        loop {
            let idx: Vec<usize> = (0..r).filter(|&j| passive[j]).collect();
            if idx.is_empty() {
                break;
            }
            let Some(l) = cholesky_sub(g, r, &idx) else {
                stalled = true;
                break 'outer;
            };
            let mut s: Vec<f64> = idx.iter().map(|&j| b[j]).collect();
            cholesky_solve(&l, idx.len(), &mut s);

            if s.iter().all(|v| *v > 0.0) {
                x.fill(0.0);
                for (&j, &v) in idx.iter().zip(&s) {
                    x[j] = v;
                }
                break;
            }
            if idx.len() == 1 && idx[0] == t && x[t] == 0.0 {
                // The entering variable cannot move off zero; drop it for good.
                passive[t] = false;
                w[t] = 0.0;
                continue 'outer;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &v) in idx.iter().zip(&s) {
                if v <= 0.0 {
                    let denom = x[j] - v;
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (&j, &v) in idx.iter().zip(&s) {
                x[j] += alpha * (v - x[j]);
            }
            for &j in &idx {
                if x[j] <= 1e-300 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
        gradient(&x, &mut w);
    }
    NnlsSolution { x, pivots, stalled }
}

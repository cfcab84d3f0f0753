//! Local NMF solvers: multiplicative updates, HALS, their accelerated
//! variants, and alternating NNLS.
//!
//! Every solver works on blocks. A block update improves a factor `F` (`r×p`)
//! given `A` (`r×p`) and the Gram matrix `G` (`r×r`) of the other factor, i.e.
//! it decreases `⟨G·F, F⟩ − 2⟨A, F⟩`. For `H` the block is `(WᵀX, WᵀW, H)`;
//! for `W` it is `(H·Xᵀ, H·Hᵀ, Wᵀ)`, so `W` is updated through its transpose.

mod nnls;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorPair;
use crate::matrix::{axpy, dot, mul_into, mul_t_into, DenseMatrix};

pub use nnls::{condition_estimate, nnls_gram, NnlsSolution};

/// Floor applied to factor entries before every multiplicative sweep, and
/// added to every multiplicative denominator.
pub const MU_EPSILON: f64 = 1e-16;

/// Squared column norms below this skip the HALS update of that row.
pub const HALS_ZERO_NORM: f64 = 1e-30;

/// Gram matrices with a larger condition estimate are damped before ANLS.
pub const ANLS_CONDITION_LIMIT: f64 = 1e12;

/// Relative Tikhonov damping added to an ill-conditioned ANLS Gram matrix.
pub const ANLS_DAMPING: f64 = 1e-12;

/// Default ratio of inner-pass decrease to first-pass decrease below which
/// accelerated solvers leave a block.
pub const DEFAULT_GAMMA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Mu,
    Amu,
    Hals,
    Ahals,
    Anls,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Anls,
        SolverKind::Mu,
        SolverKind::Amu,
        SolverKind::Hals,
        SolverKind::Ahals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Mu => "mu",
            SolverKind::Amu => "amu",
            SolverKind::Hals => "hals",
            SolverKind::Ahals => "ahals",
            SolverKind::Anls => "anls",
        }
    }

    fn is_accelerated(self) -> bool {
        matches!(self, SolverKind::Amu | SolverKind::Ahals)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "").to_ascii_lowercase();
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnknownName {
                name: s.to_string(),
                expected: "mu, amu, hals, ahals, anls".into(),
            })
    }
}

/// How long a solver call runs: a fixed number of sweeps, or whole sweeps
/// until a wall-clock quantum has elapsed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverBudget {
    Iterations(u64),
    WallTime(Duration),
}

impl SolverBudget {
    pub fn validate(&self) -> Result<()> {
        match self {
            SolverBudget::Iterations(0) => {
                Err(Error::InvalidConfig("iteration budget must be ≥ 1".into()))
            }
            SolverBudget::WallTime(d) if d.is_zero() => {
                Err(Error::InvalidConfig("wall-time budget must be > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Inner-pass cap `1 + ⌊m·n / (m·r + n·r)⌋` for accelerated block updates.
pub fn default_inner_cap(m: usize, n: usize, r: usize) -> usize {
    1 + (m * n) / (m * r + n * r)
}

/// A solver kind with its acceleration parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solver {
    pub kind: SolverKind,
    pub gamma: f64,
    /// Inner passes per block for accelerated kinds; `None` uses
    /// [`default_inner_cap`].
    pub inner_cap: Option<usize>,
}

impl From<SolverKind> for Solver {
    fn from(kind: SolverKind) -> Self {
        Solver::new(kind)
    }
}

/// Reusable buffers for one `(m, n, r)` problem.
struct Workspace {
    wt: DenseMatrix,
    a_h: DenseMatrix,
    a_w: DenseMatrix,
    gram: DenseMatrix,
    prod: DenseMatrix,
    row: Vec<f64>,
}

impl Workspace {
    fn new(m: usize, n: usize, r: usize) -> Self {
        let p = m.max(n);
        Self {
            wt: DenseMatrix::zeros(r, m),
            a_h: DenseMatrix::zeros(r, n),
            a_w: DenseMatrix::zeros(r, m),
            gram: DenseMatrix::zeros(r, r),
            prod: DenseMatrix::zeros(r, p),
            row: vec![0.0; p],
        }
    }
}

fn transpose_into(src: &DenseMatrix, dst: &mut DenseMatrix) {
    let (rows, cols) = src.shape();
    for i in 0..rows {
        for (j, v) in src.row(i).iter().enumerate() {
            dst.data_mut()[j * rows + i] = *v;
        }
    }
    debug_assert_eq!(dst.shape(), (cols, rows));
}

/// One HALS pass over the rows of `f`. Returns the decrease of the block
/// objective, computed exactly from the per-row quadratics.
fn hals_pass(a: &DenseMatrix, g: &DenseMatrix, f: &mut DenseMatrix, row: &mut [f64]) -> f64 {
    let (r, p) = f.shape();
    let c = &mut row[..p];
    let mut decrease = 0.0;
    for k in 0..r {
        let gkk = g[(k, k)];
        if gkk < HALS_ZERO_NORM {
            continue;
        }
        c.copy_from_slice(a.row(k));
        for l in 0..r {
            if l != k {
                let gkl = g[(k, l)];
                if gkl != 0.0 {
                    axpy(-gkl, f.row(l), c);
                }
            }
        }
        let fk = f.row_mut(k);
        // q(h) = gkk·‖h‖² − 2⟨c, h⟩ is the objective restricted to this row.
        let q_old = gkk * dot(fk, fk) - 2.0 * dot(c, fk);
        let inv = 1.0 / gkk;
        for (h, ci) in fk.iter_mut().zip(c.iter()) {
            *h = (ci * inv).max(0.0);
        }
        let q_new = gkk * dot(fk, fk) - 2.0 * dot(c, fk);
        decrease += q_old - q_new;
    }
    decrease
}

fn block_objective(a: &DenseMatrix, gf: &DenseMatrix, f: &DenseMatrix) -> f64 {
    let p = f.cols();
    let mut s = 0.0;
    for k in 0..f.rows() {
        s += dot(&gf.row(k)[..p], f.row(k)) - 2.0 * dot(a.row(k), f.row(k));
    }
    s
}

fn gram_times(g: &DenseMatrix, f: &DenseMatrix, out: &mut DenseMatrix) {
    let (r, p) = f.shape();
    for k in 0..r {
        let orow = &mut out.row_mut(k)[..p];
        orow.fill(0.0);
        for l in 0..r {
            let gkl = g[(k, l)];
            if gkl != 0.0 {
                axpy(gkl, f.row(l), orow);
            }
        }
    }
}

fn mu_apply(a: &DenseMatrix, gf: &DenseMatrix, f: &mut DenseMatrix) {
    let p = f.cols();
    for k in 0..f.rows() {
        let num = a.row(k);
        let den = &gf.row(k)[..p];
        for ((h, nu), de) in f.row_mut(k).iter_mut().zip(num).zip(den) {
            *h *= nu / (de + MU_EPSILON);
        }
    }
}

fn floor_entries(m: &mut DenseMatrix) {
    for v in m.data_mut() {
        if *v < MU_EPSILON {
            *v = MU_EPSILON;
        }
    }
}

impl Solver {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            gamma: DEFAULT_GAMMA,
            inner_cap: None,
        }
    }

    pub fn with_inner_cap(mut self, cap: usize) -> Self {
        self.inner_cap = Some(cap.max(1));
        self
    }

    fn passes(&self, m: usize, n: usize, r: usize) -> usize {
        if self.kind.is_accelerated() {
            self.inner_cap.unwrap_or_else(|| default_inner_cap(m, n, r))
        } else {
            1
        }
    }

    /// Repeats `pass` while the latest decrease is at least `gamma` times the
    /// first one, up to `cap` passes. `pass` returns the decrease it achieved.
    fn repeat_passes(&self, cap: usize, mut pass: impl FnMut(bool) -> f64) {
        let mut first = 0.0;
        for i in 0..cap {
            let last = i + 1 == cap;
            let dec = pass(last);
            if last {
                break;
            }
            if i == 0 {
                first = dec;
                if first <= 0.0 {
                    break;
                }
            } else if dec < self.gamma * first {
                break;
            }
        }
    }

    fn hals_block(&self, a: &DenseMatrix, g: &DenseMatrix, f: &mut DenseMatrix, row: &mut [f64], cap: usize) {
        self.repeat_passes(cap, |_| hals_pass(a, g, f, row));
    }

    fn mu_block(&self, a: &DenseMatrix, g: &DenseMatrix, f: &mut DenseMatrix, gf: &mut DenseMatrix, cap: usize) {
        gram_times(g, f, gf);
        let mut current = if cap > 1 { block_objective(a, gf, f) } else { 0.0 };
        self.repeat_passes(cap, |last| {
            mu_apply(a, gf, f);
            if last {
                return 0.0;
            }
            gram_times(g, f, gf);
            let next = block_objective(a, gf, f);
            let dec = current - next;
            current = next;
            dec
        });
    }

    /// Column-wise NNLS on the normal equations. `x` and `other` (W for the
    /// H block, H for the W block) are used only by the acceptance guard.
    fn anls_block(a: &DenseMatrix, g: &DenseMatrix, f: &mut DenseMatrix, x: &DenseMatrix, other: &DenseMatrix, is_h: bool) {
        let (r, p) = f.shape();
        let mut gram = g.data().to_vec();
        if condition_estimate(&gram, r) > ANLS_CONDITION_LIMIT {
            let max_diag = (0..r).map(|i| g[(i, i)]).fold(0.0, f64::max);
            let delta = ANLS_DAMPING * max_diag.max(1.0);
            for i in 0..r {
                gram[i * r + i] += delta;
            }
        }
        // Squared residual of column j, formed directly: the Gram form
        // hᵀGh − 2bᵀh cancels catastrophically near an exact fit.
        let residual = |j: usize, h: &[f64]| -> f64 {
            if is_h {
                (0..x.rows()).map(|i| (x[(i, j)] - dot(other.row(i), h)).powi(2)).sum()
            } else {
                (0..x.cols())
                    .map(|t| {
                        let fit: f64 = h.iter().enumerate().map(|(k, hk)| hk * other[(k, t)]).sum();
                        (x[(j, t)] - fit).powi(2)
                    })
                    .sum()
            }
        };
        let mut b = vec![0.0; r];
        let mut old = vec![0.0; r];
        for j in 0..p {
            for k in 0..r {
                b[k] = a[(k, j)];
                old[k] = f[(k, j)];
            }
            let mut sol = nnls_gram(&gram, &b, 3 * r).x;
            sol.iter_mut().for_each(|v| *v = v.max(0.0));
            // Damping and stalls can leave the solve slightly off the exact
            // block minimizer; never accept a worse column.
            if residual(j, &sol) <= residual(j, &old) {
                for k in 0..r {
                    f[(k, j)] = sol[k];
                }
            }
        }
    }

    fn sweep_with(&self, x: &DenseMatrix, pair: &mut FactorPair, ws: &mut Workspace) {
        let (m, n) = x.shape();
        let r = pair.rank();
        let cap = self.passes(m, n, r);
        let (w, h) = pair.parts_mut();
        if matches!(self.kind, SolverKind::Mu | SolverKind::Amu) {
            floor_entries(w);
            floor_entries(h);
        }
        transpose_into(w, &mut ws.wt);

        // H block: A = WᵀX, G = WᵀW.
        mul_into(&ws.wt, x, &mut ws.a_h);
        mul_t_into(&ws.wt, &ws.wt, &mut ws.gram);
        self.update_block(true, h, ws, cap, x, w);

        // W block through Wᵀ: A = H·Xᵀ, G = H·Hᵀ.
        mul_t_into(h, x, &mut ws.a_w);
        mul_t_into(h, h, &mut ws.gram);
        let mut wt = std::mem::replace(&mut ws.wt, DenseMatrix::zeros(1, 1));
        self.update_block(false, &mut wt, ws, cap, x, h);
        transpose_into(&wt, w);
        ws.wt = wt;
    }

    fn update_block(
        &self,
        is_h: bool,
        f: &mut DenseMatrix,
        ws: &mut Workspace,
        cap: usize,
        x: &DenseMatrix,
        other: &DenseMatrix,
    ) {
        let a = if is_h { &ws.a_h } else { &ws.a_w };
        match self.kind {
            SolverKind::Hals | SolverKind::Ahals => {
                self.hals_block(a, &ws.gram, f, &mut ws.row, cap)
            }
            SolverKind::Mu | SolverKind::Amu => self.mu_block(a, &ws.gram, f, &mut ws.prod, cap),
            SolverKind::Anls => Self::anls_block(a, &ws.gram, f, x, other, is_h),
        }
    }

    /// One full sweep: the `H` block, then the `W` block.
    pub fn sweep(&self, x: &DenseMatrix, pair: &mut FactorPair) -> Result<()> {
        pair.check_conforms(x)?;
        let mut ws = Workspace::new(x.rows(), x.cols(), pair.rank());
        self.sweep_with(x, pair, &mut ws);
        Ok(())
    }

    /// Runs whole sweeps under `budget`, never more than `max_sweeps` when
    /// given. Returns the number of sweeps performed.
    pub fn run_limited(
        &self,
        x: &DenseMatrix,
        pair: &mut FactorPair,
        budget: SolverBudget,
        max_sweeps: Option<u64>,
    ) -> Result<u64> {
        pair.check_conforms(x)?;
        budget.validate()?;
        let limit = max_sweeps.unwrap_or(u64::MAX);
        if limit == 0 {
            return Ok(0);
        }
        let mut ws = Workspace::new(x.rows(), x.cols(), pair.rank());
        let mut done = 0u64;
        match budget {
            SolverBudget::Iterations(n) => {
                let n = n.min(limit);
                while done < n {
                    self.sweep_with(x, pair, &mut ws);
                    done += 1;
                }
            }
            SolverBudget::WallTime(dt) => {
                let start = Instant::now();
                loop {
                    self.sweep_with(x, pair, &mut ws);
                    done += 1;
                    if start.elapsed() >= dt || done >= limit {
                        break;
                    }
                }
            }
        }
        Ok(done)
    }

    pub fn run(&self, x: &DenseMatrix, pair: &mut FactorPair, budget: SolverBudget) -> Result<u64> {
        self.run_limited(x, pair, budget, None)
    }
}

/// Result of [`algo_nmf`]: the improved pair and how many sweeps it took.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub pair: FactorPair,
    pub sweeps: u64,
}

/// Improves `pair` locally with the default parameters of `kind`.
pub fn algo_nmf(
    kind: SolverKind,
    x: &DenseMatrix,
    pair: FactorPair,
    budget: SolverBudget,
) -> Result<SolverRun> {
    let mut pair = pair;
    let sweeps = Solver::new(kind).run(x, &mut pair, budget)?;
    Ok(SolverRun { pair, sweeps })
}

fn single_sweep(solver: Solver, x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let mut pair = FactorPair::new(w.clone(), h.clone())?;
    solver.sweep(x, &mut pair)?;
    Ok(pair.into_parts())
}

/// One multiplicative-update sweep.
pub fn mu_sweep(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    single_sweep(Solver::new(SolverKind::Mu), x, w, h)
}

/// One cyclic HALS sweep.
pub fn hals_sweep(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    single_sweep(Solver::new(SolverKind::Hals), x, w, h)
}

/// One accelerated sweep; `kind` must be [`SolverKind::Amu`] or
/// [`SolverKind::Ahals`].
pub fn accelerated_sweep(
    kind: SolverKind,
    x: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !kind.is_accelerated() {
        return Err(Error::InvalidConfig(format!("{kind} is not an accelerated solver")));
    }
    single_sweep(Solver::new(kind), x, w, h)
}

/// One alternating nonnegative least-squares sweep.
pub fn anls_sweep(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    single_sweep(Solver::new(SolverKind::Anls), x, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{init_pair, InitStrategy, RandomSource};
    use crate::linalg::relative_error;

    fn exact_positive() -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        let w = DenseMatrix::from_fn(6, 3, |i, j| 0.5 + ((i * 3 + j) % 5) as f64 * 0.3);
        let h = DenseMatrix::from_fn(3, 5, |i, j| 0.2 + ((i * 5 + j) % 4) as f64 * 0.4);
        (w.matmul(&h).unwrap(), w, h)
    }

    #[test]
    fn names_parse() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert_eq!("A-HALS".parse::<SolverKind>().unwrap(), SolverKind::Ahals);
        assert!("lbfgs".parse::<SolverKind>().is_err());
    }

    #[test]
    fn inner_cap_rule() {
        // ρ = 2500 / 1000 = 2.5
        assert_eq!(default_inner_cap(50, 50, 10), 3);
        assert_eq!(default_inner_cap(24, 24, 12), 2);
    }

    #[test]
    fn exact_factorization_is_a_fixed_point() {
        let (x, w, h) = exact_positive();
        for kind in SolverKind::ALL {
            let run = algo_nmf(kind, &x, FactorPair::new(w.clone(), h.clone()).unwrap(), SolverBudget::Iterations(25)).unwrap();
            assert_eq!(run.sweeps, 25);
            let e = relative_error(&x, run.pair.w(), run.pair.h()).unwrap();
            assert!(e < 1e-12, "{kind}: {e}");
        }
    }

    #[test]
    fn mu_leaves_exact_positive_factors_unchanged() {
        let (x, w, h) = exact_positive();
        let (w2, h2) = mu_sweep(&x, &w, &h).unwrap();
        for (a, b) in w.data().iter().zip(w2.data()).chain(h.data().iter().zip(h2.data())) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_revives_zero_entries() {
        let (x, w, mut h) = exact_positive();
        h[(0, 0)] = 0.0;
        let (_, h2) = mu_sweep(&x, &w, &h).unwrap();
        assert!(h2[(0, 0)] > 0.0);
    }

    #[test]
    fn hals_rank_one_step_is_least_squares() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [3.0, 1.0, 4.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let h = DenseMatrix::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        let mut pair = FactorPair::new(w.clone(), h).unwrap();
        let solver = Solver::new(SolverKind::Hals);
        let mut ws = Workspace::new(2, 3, 1);
        // Only the H block of the first sweep is checked: h = max(0, Xᵀw / ‖w‖²).
        transpose_into(pair.w(), &mut ws.wt);
        mul_into(&ws.wt, &x, &mut ws.a_h);
        mul_t_into(&ws.wt, &ws.wt, &mut ws.gram);
        let (wm, hm) = pair.parts_mut();
        solver.update_block(true, hm, &mut ws, 1, &x, wm);
        for (a, b) in pair.h().row(0).iter().zip([7.0 / 5.0, 4.0 / 5.0, 8.0 / 5.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_columns_are_skipped_without_nan() {
        let x = DenseMatrix::from_fn(5, 4, |i, j| ((i + j) % 3) as f64 + 0.5);
        let w = DenseMatrix::from_fn(5, 3, |i, j| if j == 1 { 0.0 } else { (i + 1) as f64 * 0.1 });
        let h = DenseMatrix::from_fn(3, 4, |i, j| if i == 1 { 0.0 } else { 0.3 + j as f64 * 0.1 });
        for kind in SolverKind::ALL {
            let run = algo_nmf(kind, &x, FactorPair::new(w.clone(), h.clone()).unwrap(), SolverBudget::Iterations(5)).unwrap();
            assert!(run.pair.w().data().iter().chain(run.pair.h().data()).all(|v| v.is_finite() && *v >= 0.0));
        }
    }

    #[test]
    fn ahals_with_unit_cap_equals_hals() {
        let x = DenseMatrix::from_fn(8, 6, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        for seed in 0..20 {
            let p = init_pair(InitStrategy::RndCube, 8, 6, 3, &mut RandomSource::new(seed));
            let mut a = p.clone();
            let mut b = p;
            Solver::new(SolverKind::Hals).run(&x, &mut a, SolverBudget::Iterations(10)).unwrap();
            Solver::new(SolverKind::Ahals).with_inner_cap(1).run(&x, &mut b, SolverBudget::Iterations(10)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wall_time_budget_runs_at_least_one_sweep() {
        let (x, w, h) = exact_positive();
        let mut pair = FactorPair::new(w, h).unwrap();
        let s = Solver::new(SolverKind::Hals);
        let n = s.run(&x, &mut pair, SolverBudget::WallTime(Duration::from_nanos(1))).unwrap();
        assert_eq!(n, 1);
        let n = s.run(&x, &mut pair, SolverBudget::WallTime(Duration::from_millis(5))).unwrap();
        assert!(n >= 1);
        let n = s
            .run_limited(&x, &mut pair, SolverBudget::WallTime(Duration::from_secs(60)), Some(3))
            .unwrap();
        assert_eq!(n, 3);
        assert!(s.run(&x, &mut pair, SolverBudget::Iterations(0)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (x, w, h) = exact_positive();
        let bad = FactorPair::new(h.transpose(), w.transpose()).unwrap();
        assert!(matches!(
            algo_nmf(SolverKind::Hals, &x, bad, SolverBudget::Iterations(1)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn anls_recovers_orthogonal_problem() {
        let w = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap();
        let h_star = DenseMatrix::from_rows(&[[0.5, 0.0, 3.0], [1.0, 2.0, 0.0]]).unwrap();
        let x = w.matmul(&h_star).unwrap();
        let mut ws = Workspace::new(3, 3, 2);
        let mut pair = FactorPair::new(w, DenseMatrix::zeros(2, 3)).unwrap();
        transpose_into(pair.w(), &mut ws.wt);
        mul_into(&ws.wt, &x, &mut ws.a_h);
        mul_t_into(&ws.wt, &ws.wt, &mut ws.gram);
        let (w, h) = pair.parts_mut();
        Solver::new(SolverKind::Anls).update_block(true, h, &mut ws, 1, &x, w);
        for (a, b) in pair.h().data().iter().zip(h_star.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn anls_rank_deficient_w_stays_finite() {
        let x = crate::generators::ledm_integer(6).unwrap();
        // Two identical columns in W make WᵀW singular.
        let w = DenseMatrix::from_fn(6, 4, |i, j| if j == 3 { (i % 2) as f64 } else { ((i + j) % 3) as f64 * 0.5 + if j == 2 { 0.0 } else { 0.1 } });
        let mut w = w;
        for i in 0..6 {
            w[(i, 1)] = w[(i, 0)];
        }
        let h = DenseMatrix::from_fn(4, 6, |i, j| ((i * 2 + j) % 5) as f64 * 0.2);
        let before = relative_error(&x, &w, &h).unwrap();
        let (w2, h2) = anls_sweep(&x, &w, &h).unwrap();
        assert!(w2.data().iter().chain(h2.data()).all(|v| v.is_finite() && *v >= 0.0));
        assert!(relative_error(&x, &w2, &h2).unwrap() <= before + 1e-12);
    }

    #[test]
    fn accelerated_sweep_rejects_base_kinds() {
        let (x, w, h) = exact_positive();
        assert!(accelerated_sweep(SolverKind::Hals, &x, &w, &h).is_err());
        assert!(accelerated_sweep(SolverKind::Amu, &x, &w, &h).is_ok());
    }
}

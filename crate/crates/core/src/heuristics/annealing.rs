use super::{check_rank, refine_in, Context, Outcome, RefineConfig, SaConfig};
use crate::error::{Error, Result};
use crate::factor::FactorPair;
use crate::init::{init_pair, RandomSource};
use crate::matrix::DenseMatrix;
use crate::solvers::{Solver, SolverBudget};

/// Metropolis rule: a move changing the error by `delta` at temperature `t`
/// is accepted when the uniform draw `u` falls below `exp(−delta / t)`.
pub fn accept_move(delta: f64, t: f64, u: f64) -> bool {
    u < (-delta / t).exp()
}

/// Result of [`anneal`], before final refinement.
#[derive(Clone, Debug)]
pub struct AnnealResult {
    pub pair: FactorPair,
    pub error: f64,
    /// Best error so far, recorded after every move (preceded by the
    /// starting error).
    pub best_trace: Vec<f64>,
    pub moves: usize,
    pub accepted: usize,
    /// Set when the best error dropped below `tol` and the schedule was cut.
    pub early_exit: bool,
}

/// Overwrites the rank-one terms `idx` of `pair` with those of `fresh`.
fn splice(pair: &mut FactorPair, fresh: &FactorPair, idx: &[usize]) {
    let (w, h) = pair.parts_mut();
    let m = w.rows();
    for (slot, &k) in idx.iter().enumerate() {
        for i in 0..m {
            w[(i, k)] = fresh.w()[(i, slot)];
        }
        h.row_mut(k).copy_from_slice(fresh.h().row(slot));
    }
}

pub(super) fn anneal_in(
    ctx: &mut Context<'_>,
    r: usize,
    cfg: &SaConfig,
    tol: f64,
    rng: &mut RandomSource,
    warm_start: Option<FactorPair>,
) -> Result<AnnealResult> {
    let (m, n) = ctx.x.shape();
    let mut current = match warm_start {
        Some(p) => {
            p.check_conforms(ctx.x)?;
            if p.rank() != r {
                return Err(Error::DimensionMismatch(format!(
                    "warm start has rank {} but r = {r}",
                    p.rank()
                )));
            }
            p
        }
        None => init_pair(cfg.init, m, n, r, rng),
    };
    let mut e = ctx.error(&mut current);
    let mut best = current.clone();
    let mut e_min = e;
    let mut trace = vec![e_min];
    let (mut moves, mut accepted) = (0, 0);
    let mut early_exit = e_min < tol;

    'schedule: for t in cfg.ladder() {
        if early_exit {
            break;
        }
        for _ in 0..cfg.k {
            if ctx.exhausted() {
                break 'schedule;
            }
            let idx = rng.distinct_indices(r, cfg.j);
            let fresh = init_pair(cfg.init, m, n, cfg.j, rng);
            let mut cand = current.clone();
            splice(&mut cand, &fresh, &idx);
            ctx.improve(&mut cand, SolverBudget::Iterations(cfg.n))?;
            let e_cand = ctx.error(&mut cand);
            moves += 1;
            let u = rng.uniform();
            if accept_move(e_cand - e, t, u) {
                accepted += 1;
                current = cand;
                e = e_cand;
                if e < e_min {
                    e_min = e;
                    best = current.clone();
                }
                if e_min < tol {
                    early_exit = true;
                    trace.push(e_min);
                    break 'schedule;
                }
            }
            trace.push(e_min);
        }
    }
    Ok(AnnealResult {
        pair: best,
        error: e_min,
        best_trace: trace,
        moves,
        accepted,
        early_exit,
    })
}

/// The annealing search alone: returns the best pair visited, without
/// final refinement. `r` may equal `min(m, n)`.
pub fn anneal(
    x: &DenseMatrix,
    r: usize,
    cfg: &SaConfig,
    tol: f64,
    solver: impl Into<Solver>,
    seed: u64,
    warm_start: Option<FactorPair>,
) -> Result<AnnealResult> {
    check_rank(x, r, false)?;
    cfg.validate(r)?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    let mut rng = RandomSource::new(seed);
    anneal_in(&mut ctx, r, cfg, tol, &mut rng, warm_start)
}

pub(super) fn sa_in(
    ctx: &mut Context<'_>,
    r: usize,
    cfg: &SaConfig,
    refine: &RefineConfig,
    seed: u64,
    warm_start: Option<FactorPair>,
) -> Result<Outcome> {
    let mut rng = RandomSource::new(seed);
    let found = anneal_in(ctx, r, cfg, refine.tol, &mut rng, warm_start)?;
    let refined = refine_in(ctx, found.pair, refine)?;
    Ok(ctx.outcome(refined.pair))
}

/// Simulated annealing followed by final refinement of the best pair.
pub fn simulated_annealing(
    x: &DenseMatrix,
    r: usize,
    cfg: &SaConfig,
    refine: &RefineConfig,
    solver: impl Into<Solver>,
    seed: u64,
    warm_start: Option<FactorPair>,
) -> Result<Outcome> {
    check_rank(x, r, false)?;
    cfg.validate(r)?;
    refine.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    sa_in(&mut ctx, r, cfg, refine, seed, warm_start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::ledm_integer;
    use crate::solvers::SolverKind;

    #[test]
    fn improving_moves_always_accepted() {
        for u in [0.0, 0.5, 0.999_999] {
            assert!(accept_move(-0.1, 1e-4, u));
            assert!(accept_move(0.0, 1e-4, u));
        }
        assert!(!accept_move(0.1, 1e-6, 1e-300));
    }

    #[test]
    fn best_trace_non_increasing() {
        let x = ledm_integer(8).unwrap();
        let cfg = SaConfig { k: 5, n: 20, levels: 4, ..Default::default() };
        let res = anneal(&x, 6, &cfg, 1e-6, SolverKind::Ahals, 2, None).unwrap();
        assert!(res.best_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(res.error, *res.best_trace.last().unwrap());
        assert!(res.early_exit || res.moves == 20);
    }

    #[test]
    fn exact_warm_start_exits_immediately() {
        let w = DenseMatrix::from_fn(6, 3, |i, j| ((i + 2 * j) % 4) as f64 + 0.5);
        let h = DenseMatrix::from_fn(3, 7, |i, j| ((i * j) % 3) as f64 + 0.25);
        let x = w.matmul(&h).unwrap();
        let warm = FactorPair::new(w, h).unwrap();
        let res = anneal(&x, 3, &SaConfig::default(), 1e-6, SolverKind::Ahals, 0, Some(warm.clone())).unwrap();
        assert!(res.early_exit);
        assert_eq!(res.moves, 0);
        assert_eq!(res.pair, warm);
    }

    #[test]
    fn move_reaching_tol_stops_the_schedule() {
        // A rank-2 positive matrix is solved by the first few moves at r = 2.
        let w = DenseMatrix::from_fn(5, 2, |i, j| (i + j) as f64 + 1.0);
        let h = DenseMatrix::from_fn(2, 5, |i, j| ((i + 1) * (j + 1)) as f64);
        let x = w.matmul(&h).unwrap();
        let res = anneal(&x, 2, &SaConfig::default(), 1e-6, SolverKind::Ahals, 5, None).unwrap();
        assert!(res.early_exit);
        assert!(res.error < 1e-6);
        assert!(res.moves < 22 * 50);
    }

    #[test]
    fn rejects_bad_warm_start_and_j() {
        let x = ledm_integer(6).unwrap();
        let warm = FactorPair::new(DenseMatrix::zeros(6, 3), DenseMatrix::zeros(3, 6)).unwrap();
        assert!(anneal(&x, 4, &SaConfig::default(), 1e-6, SolverKind::Ahals, 0, Some(warm)).is_err());
        let cfg = SaConfig { j: 5, ..Default::default() };
        assert!(matches!(
            anneal(&x, 4, &cfg, 1e-6, SolverKind::Ahals, 0, None),
            Err(Error::InvalidConfig(_))
        ));
    }
}

use super::annealing::anneal_in;
use super::{check_rank, refine_in, Context, Outcome, RbrConfig, RefineConfig, SaConfig};
use crate::error::{Error, Result};
use crate::factor::FactorPair;
use crate::init::{init_pair, RandomSource};
use crate::linalg::{leading_singular_triplet, SingularTriplet};
use crate::matrix::DenseMatrix;
use crate::solvers::{Solver, SolverBudget};

const TRIPLET_TOL: f64 = 1e-12;
const TRIPLET_MAX_ITERS: usize = 20_000;

/// Result of [`rank_by_rank_raw`], before final refinement.
#[derive(Clone, Debug)]
pub struct RankByRankResult {
    pub pair: FactorPair,
    pub error: f64,
    /// `stage_errors[k - 1]` is the error of the kept rank-`k` pair.
    pub stage_errors: Vec<f64>,
}

fn leading_rank_one(x: &DenseMatrix) -> Result<FactorPair> {
    let t: SingularTriplet = match leading_singular_triplet(x, TRIPLET_TOL, TRIPLET_MAX_ITERS) {
        Ok(t) => t,
        Err(Error::NoConvergence { best, .. }) => *best,
        Err(e) => return Err(e),
    };
    let w = DenseMatrix::from_fn(x.rows(), 1, |i, _| t.u[i].abs());
    let h = DenseMatrix::from_fn(1, x.cols(), |_, j| t.sigma * t.v[j].abs());
    Ok(FactorPair::from_parts(w, h))
}

/// Prepends the rank-one term of `extra` to `pair`.
fn with_leading_term(pair: &FactorPair, extra: &FactorPair) -> FactorPair {
    let (m, k) = pair.w().shape();
    let n = pair.h().cols();
    let w = DenseMatrix::from_fn(m, k + 1, |i, j| {
        if j == 0 {
            extra.w()[(i, 0)]
        } else {
            pair.w()[(i, j - 1)]
        }
    });
    let mut h = DenseMatrix::zeros(k + 1, n);
    h.row_mut(0).copy_from_slice(extra.h().row(0));
    for l in 0..k {
        h.row_mut(l + 1).copy_from_slice(pair.h().row(l));
    }
    FactorPair::from_parts(w, h)
}

fn rank_plus_one(
    ctx: &mut Context<'_>,
    pair: &FactorPair,
    cfg: &RbrConfig,
    rng: &mut RandomSource,
) -> Result<(FactorPair, f64)> {
    let (m, n) = ctx.x.shape();
    let mut best: Option<(FactorPair, f64)> = None;
    for attempt in 0..cfg.k {
        if attempt > 0 && ctx.exhausted() {
            break;
        }
        let extra = init_pair(cfg.init, m, n, 1, rng);
        // The new term goes first so that the first block update of the
        // solver fits it against the previous stage, which cannot increase
        // the error.
        let mut cand = with_leading_term(pair, &extra);
        ctx.improve(&mut cand, SolverBudget::Iterations(cfg.n))?;
        let e = ctx.error(&mut cand);
        if best.as_ref().is_none_or(|(_, b)| e < *b) {
            best = Some((cand, e));
        }
    }
    Ok(best.expect("at least one attempt"))
}

pub(super) fn rbr_raw_in(
    ctx: &mut Context<'_>,
    r: usize,
    cfg: &RbrConfig,
    rng: &mut RandomSource,
) -> Result<RankByRankResult> {
    let mut pair = leading_rank_one(ctx.x)?;
    let mut e = ctx.error(&mut pair);
    let mut stage_errors = vec![e];
    for _ in 2..=r {
        let (next, e_next) = rank_plus_one(ctx, &pair, cfg, rng)?;
        pair = next;
        e = e_next;
        stage_errors.push(e);
    }
    Ok(RankByRankResult {
        pair,
        error: e,
        stage_errors,
    })
}

pub(super) fn rbr_in(
    ctx: &mut Context<'_>,
    r: usize,
    cfg: &RbrConfig,
    refine: &RefineConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = RandomSource::new(seed);
    let raw = rbr_raw_in(ctx, r, cfg, &mut rng)?;
    let refined = refine_in(ctx, raw.pair, refine)?;
    Ok(ctx.outcome(refined.pair))
}

pub(super) fn hybrid_in(
    ctx: &mut Context<'_>,
    r: usize,
    rbr: &RbrConfig,
    sa: &SaConfig,
    refine: &RefineConfig,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = RandomSource::new(seed);
    let raw = rbr_raw_in(ctx, r, rbr, &mut rng)?;
    let found = anneal_in(ctx, r, sa, refine.tol, &mut rng, Some(raw.pair))?;
    let refined = refine_in(ctx, found.pair, refine)?;
    Ok(ctx.outcome(refined.pair))
}

/// Rank-by-rank construction without final refinement: the best nonnegative
/// rank-one approximation, then `r − 1` stages that each add one random
/// rank-one term and keep the best of `K` locally improved attempts.
pub fn rank_by_rank_raw(
    x: &DenseMatrix,
    r: usize,
    cfg: &RbrConfig,
    solver: impl Into<Solver>,
    seed: u64,
) -> Result<RankByRankResult> {
    check_rank(x, r, false)?;
    cfg.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    let mut rng = RandomSource::new(seed);
    rbr_raw_in(&mut ctx, r, cfg, &mut rng)
}

/// Rank-by-rank followed by final refinement.
pub fn rank_by_rank(
    x: &DenseMatrix,
    r: usize,
    cfg: &RbrConfig,
    refine: &RefineConfig,
    solver: impl Into<Solver>,
    seed: u64,
) -> Result<Outcome> {
    check_rank(x, r, false)?;
    cfg.validate()?;
    refine.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    rbr_in(&mut ctx, r, cfg, refine, seed)
}

/// Rank-by-rank output used as the starting point of simulated annealing,
/// followed by final refinement.
pub fn hybrid(
    x: &DenseMatrix,
    r: usize,
    rbr: &RbrConfig,
    sa: &SaConfig,
    refine: &RefineConfig,
    solver: impl Into<Solver>,
    seed: u64,
) -> Result<Outcome> {
    check_rank(x, r, false)?;
    rbr.validate()?;
    sa.validate(r)?;
    refine.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    hybrid_in(&mut ctx, r, rbr, sa, refine, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{ledm_integer, regular_ngon_slack};
    use crate::solvers::SolverKind;

    #[test]
    fn rank_one_input_is_exact_at_stage_one() {
        let u = [1.0, 2.0, 0.5, 3.0];
        let v = [2.0, 0.0, 1.0];
        let x = DenseMatrix::from_fn(4, 3, |i, j| u[i] * v[j]);
        let res = rank_by_rank_raw(&x, 1, &RbrConfig::default(), SolverKind::Ahals, 0).unwrap();
        assert!(res.error < 1e-12);
        assert_eq!(res.stage_errors.len(), 1);
    }

    #[test]
    fn stage_errors_never_increase() {
        for (x, r) in [(ledm_integer(8).unwrap(), 6), (regular_ngon_slack(9).unwrap(), 7)] {
            for seed in 0..5 {
                for kind in [SolverKind::Hals, SolverKind::Ahals, SolverKind::Anls] {
                    let res = rank_by_rank_raw(&x, r, &RbrConfig::default(), kind, seed).unwrap();
                    for w in res.stage_errors.windows(2) {
                        assert!(w[1] <= w[0] + 1e-12, "{kind}: {:?}", res.stage_errors);
                    }
                }
            }
        }
    }

    #[test]
    fn rbr_solves_hexagon() {
        let x = regular_ngon_slack(6).unwrap();
        let out = rank_by_rank(&x, 5, &RbrConfig::default(), &RefineConfig::iterations(1000), SolverKind::Ahals, 1).unwrap();
        assert!(out.error <= 1e-6, "{}", out.error);
    }

    #[test]
    fn hybrid_is_deterministic() {
        let x = ledm_integer(6).unwrap();
        let sa = SaConfig { k: 5, levels: 3, ..Default::default() };
        let refine = RefineConfig::iterations(200);
        let a = hybrid(&x, 5, &RbrConfig::default(), &sa, &refine, SolverKind::Ahals, 3).unwrap();
        let b = hybrid(&x, 5, &RbrConfig::default(), &sa, &refine, SolverKind::Ahals, 3).unwrap();
        assert_eq!(a.pair, b.pair);
        assert_eq!(a.sweeps, b.sweeps);
    }
}

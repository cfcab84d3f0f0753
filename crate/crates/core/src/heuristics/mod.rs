//! Exact-NMF heuristics: final refinement, the two multi-start schemes,
//! simulated annealing, rank-by-rank and their hybrid.
//!
//! Every heuristic is a pure function of `(X, r, configs, seed)`. Those that
//! return a pair from a search phase (SA, RBR, Hybrid) apply
//! [`final_refinement`] to it before returning.

mod annealing;
mod rank_by_rank;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{nonzero_norm, FactorPair};
use crate::init::{init_pair, InitStrategy, RandomSource};
use crate::matrix::DenseMatrix;
use crate::solvers::{Solver, SolverBudget, SolverKind};

pub use annealing::{accept_move, anneal, simulated_annealing, AnnealResult};
pub use rank_by_rank::{hybrid, rank_by_rank, rank_by_rank_raw, RankByRankResult};

/// Relative error at or below which a factorization counts as exact.
pub const EXACT_TOL: f64 = 1e-6;

/// Sweeps per refinement round in iteration-budget mode, roughly what one
/// second of a small-matrix solver amounts to.
pub const DEFAULT_REFINE_SWEEPS: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub alpha: f64,
    pub budget: SolverBudget,
    pub tol: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.99,
            budget: SolverBudget::WallTime(Duration::from_secs(1)),
            tol: EXACT_TOL,
        }
    }
}

impl RefineConfig {
    /// Default settings with a fixed number of sweeps per round, which makes
    /// every run replayable.
    pub fn iterations(sweeps: u64) -> Self {
        Self {
            budget: SolverBudget::Iterations(sweeps),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        self.budget.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ms2Config {
    pub k: usize,
    pub n: u64,
    pub init: InitStrategy,
}

impl Default for Ms2Config {
    fn default() -> Self {
        Self {
            k: 200,
            n: 20,
            init: InitStrategy::Sparse11,
        }
    }
}

impl Ms2Config {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("MS2 needs K, N >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub t0: f64,
    pub t_end: f64,
    /// Temperature levels including both endpoints.
    pub levels: usize,
    /// Moves per temperature level.
    pub k: usize,
    /// Solver sweeps per move.
    pub n: u64,
    /// Rank-one terms reinitialized per move.
    pub j: usize,
    pub init: InitStrategy,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            t0: 0.1,
            t_end: 1e-4,
            levels: 22,
            k: 50,
            n: 100,
            j: 2,
            init: InitStrategy::Sparse10,
        }
    }
}

impl SaConfig {
    /// Cooling factor between consecutive levels.
    pub fn beta(&self) -> f64 {
        (self.t_end / self.t0).powf(1.0 / (self.levels as f64 - 1.0))
    }

    /// Geometric temperature ladder from `t0` down to `t_end`.
    pub fn ladder(&self) -> Vec<f64> {
        let beta = self.beta();
        let mut t = self.t0;
        let mut out = Vec::with_capacity(self.levels);
        for i in 0..self.levels {
            out.push(if i + 1 == self.levels { self.t_end } else { t });
            t *= beta;
        }
        out
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end < self.t0) {
            return Err(Error::InvalidConfig("SA needs 0 < T_end < T0".into()));
        }
        if self.levels < 2 {
            return Err(Error::InvalidConfig("SA needs at least 2 temperature levels".into()));
        }
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("SA needs K, N >= 1".into()));
        }
        if self.j == 0 || self.j > r {
            return Err(Error::InvalidConfig(format!("SA needs 1 <= J <= r, got J = {} with r = {r}", self.j)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbrConfig {
    pub k: usize,
    pub n: u64,
    pub init: InitStrategy,
}

impl Default for RbrConfig {
    fn default() -> Self {
        Self {
            k: 10,
            n: 50,
            init: InitStrategy::Sparse10,
        }
    }
}

impl RbrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("RBR needs K, N >= 1".into()));
        }
        Ok(())
    }
}

/// Final pair of a heuristic run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub pair: FactorPair,
    pub error: f64,
    /// Solver sweeps spent in the whole run.
    pub sweeps: u64,
}

impl Outcome {
    pub fn is_exact(&self, tol: f64) -> bool {
        self.error <= tol
    }
}

/// Result of [`final_refinement`].
#[derive(Clone, Debug)]
pub struct Refined {
    pub pair: FactorPair,
    pub error: f64,
    /// Error before refinement followed by the error after every round.
    pub trace: Vec<f64>,
    pub sweeps: u64,
}

/// Shared state of one run: the target, its norm, the solver and the sweep
/// accounting.
pub(crate) struct Context<'a> {
    pub x: &'a DenseMatrix,
    x_norm: f64,
    pub solver: Solver,
    pub sweeps: u64,
    max_sweeps: Option<u64>,
}

impl<'a> Context<'a> {
    pub fn new(x: &'a DenseMatrix, solver: Solver, max_sweeps: Option<u64>) -> Result<Self> {
        Ok(Self {
            x,
            x_norm: nonzero_norm(x)?,
            solver,
            sweeps: 0,
            max_sweeps,
        })
    }

    pub fn exhausted(&self) -> bool {
        self.max_sweeps.is_some_and(|m| self.sweeps >= m)
    }

    pub fn improve(&mut self, pair: &mut FactorPair, budget: SolverBudget) -> Result<()> {
        let remaining = self.max_sweeps.map(|m| m.saturating_sub(self.sweeps));
        self.sweeps += self.solver.run_limited(self.x, pair, budget, remaining)?;
        Ok(())
    }

    pub fn error(&self, pair: &mut FactorPair) -> f64 {
        pair.error_with_norm(self.x, self.x_norm)
    }

    pub fn outcome(&self, mut pair: FactorPair) -> Outcome {
        let error = self.error(&mut pair);
        Outcome {
            pair,
            error,
            sweeps: self.sweeps,
        }
    }
}

pub(crate) fn check_rank(x: &DenseMatrix, r: usize, strict: bool) -> Result<()> {
    let (m, n) = x.shape();
    let bound = m.min(n);
    if r == 0 {
        return Err(Error::InvalidRank { r, m, n, reason: "rank must be at least 1" });
    }
    if strict && r >= bound {
        return Err(Error::InvalidRank { r, m, n, reason: "rank must be below min(m, n)" });
    }
    if r > bound {
        return Err(Error::InvalidRank { r, m, n, reason: "rank must not exceed min(m, n)" });
    }
    Ok(())
}

pub(crate) fn refine_in(ctx: &mut Context<'_>, mut pair: FactorPair, cfg: &RefineConfig) -> Result<Refined> {
    let start = ctx.sweeps;
    let mut e = ctx.error(&mut pair);
    let mut prev = f64::INFINITY;
    let mut trace = vec![e];
    while e < cfg.alpha * prev && e > cfg.tol && !ctx.exhausted() {
        ctx.improve(&mut pair, cfg.budget)?;
        prev = e;
        e = ctx.error(&mut pair);
        trace.push(e);
    }
    Ok(Refined {
        pair,
        error: e,
        trace,
        sweeps: ctx.sweeps - start,
    })
}

/// Runs the solver in budget periods while each period shrinks the relative
/// error by at least the factor `alpha` and the error is above `tol`.
pub fn final_refinement(
    x: &DenseMatrix,
    pair: FactorPair,
    cfg: &RefineConfig,
    solver: impl Into<Solver>,
) -> Result<Refined> {
    cfg.validate()?;
    pair.check_conforms(x)?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    refine_in(&mut ctx, pair, cfg)
}

fn ms1_in(ctx: &mut Context<'_>, r: usize, refine: &RefineConfig, init: InitStrategy, seed: u64) -> Result<Outcome> {
    let (m, n) = ctx.x.shape();
    let mut rng = RandomSource::new(seed);
    let pair = init_pair(init, m, n, r, &mut rng);
    let refined = refine_in(ctx, pair, refine)?;
    Ok(ctx.outcome(refined.pair))
}

fn ms2_in(ctx: &mut Context<'_>, r: usize, cfg: &Ms2Config, refine: &RefineConfig, seed: u64) -> Result<Outcome> {
    if cfg.k == 1 {
        // A single candidate needs no screening; this keeps K = 1 identical
        // to MS1 for the same seed.
        return ms1_in(ctx, r, refine, cfg.init, seed);
    }
    let (m, n) = ctx.x.shape();
    let mut rng = RandomSource::new(seed);
    let mut best: Option<FactorPair> = None;
    let mut e_best = f64::INFINITY;
    for _ in 0..cfg.k {
        if ctx.exhausted() {
            break;
        }
        let mut cand = init_pair(cfg.init, m, n, r, &mut rng);
        ctx.improve(&mut cand, SolverBudget::Iterations(cfg.n))?;
        let e = ctx.error(&mut cand);
        if e < e_best {
            e_best = e;
            best = Some(cand);
        }
    }
    let best = match best {
        Some(p) => p,
        None => init_pair(cfg.init, m, n, r, &mut rng),
    };
    let refined = refine_in(ctx, best, refine)?;
    Ok(ctx.outcome(refined.pair))
}

/// One multi-start-1 run: a random initialization followed by final
/// refinement. Requires `r < min(m, n)`.
pub fn ms1(
    x: &DenseMatrix,
    r: usize,
    refine: &RefineConfig,
    solver: impl Into<Solver>,
    init: InitStrategy,
    seed: u64,
) -> Result<Outcome> {
    check_rank(x, r, true)?;
    refine.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    ms1_in(&mut ctx, r, refine, init, seed)
}

/// One multi-start-2 run: `K` random initializations screened with `N`
/// sweeps each, then final refinement of the best one.
pub fn ms2(
    x: &DenseMatrix,
    r: usize,
    cfg: &Ms2Config,
    refine: &RefineConfig,
    solver: impl Into<Solver>,
    seed: u64,
) -> Result<Outcome> {
    check_rank(x, r, true)?;
    cfg.validate()?;
    refine.validate()?;
    let mut ctx = Context::new(x, solver.into(), None)?;
    ms2_in(&mut ctx, r, cfg, refine, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicKind {
    Ms1,
    Ms2,
    Sa,
    Rbr,
    Hybrid,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 5] = [
        HeuristicKind::Ms1,
        HeuristicKind::Ms2,
        HeuristicKind::Sa,
        HeuristicKind::Rbr,
        HeuristicKind::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Ms1 => "ms1",
            HeuristicKind::Ms2 => "ms2",
            HeuristicKind::Sa => "sa",
            HeuristicKind::Rbr => "rbr",
            HeuristicKind::Hybrid => "hybrid",
        }
    }

    /// Column label used in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            HeuristicKind::Ms1 => "MS1",
            HeuristicKind::Ms2 => "MS2",
            HeuristicKind::Sa => "SA",
            HeuristicKind::Rbr => "RBR",
            HeuristicKind::Hybrid => "Hybrid",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HeuristicKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                name: s.to_string(),
                expected: "ms1, ms2, sa, rbr, hybrid".into(),
            })
    }
}

/// A heuristic together with every parameter it depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    pub solver: Solver,
    pub refine: RefineConfig,
    pub ms1_init: InitStrategy,
    pub ms2: Ms2Config,
    pub sa: SaConfig,
    pub rbr: RbrConfig,
    /// Hard cap on solver sweeps for one run, across all phases.
    pub max_sweeps: Option<u64>,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind) -> Self {
        Self {
            kind,
            solver: Solver::new(SolverKind::Ahals),
            refine: RefineConfig::default(),
            ms1_init: InitStrategy::Sparse11,
            ms2: Ms2Config::default(),
            sa: SaConfig::default(),
            rbr: RbrConfig::default(),
            max_sweeps: None,
        }
    }

    pub fn with_refine(mut self, refine: RefineConfig) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_solver(mut self, solver: impl Into<Solver>) -> Self {
        self.solver = solver.into();
        self
    }

    /// Sets the initialization strategy of every phase.
    pub fn with_init(mut self, init: InitStrategy) -> Self {
        self.ms1_init = init;
        self.ms2.init = init;
        self.sa.init = init;
        self.rbr.init = init;
        self
    }

    pub fn with_max_sweeps(mut self, cap: u64) -> Self {
        self.max_sweeps = Some(cap);
        self
    }

    /// The initialization strategy this heuristic actually uses.
    pub fn init(&self) -> InitStrategy {
        match self.kind {
            HeuristicKind::Ms1 => self.ms1_init,
            HeuristicKind::Ms2 => self.ms2.init,
            HeuristicKind::Sa => self.sa.init,
            HeuristicKind::Rbr | HeuristicKind::Hybrid => self.rbr.init,
        }
    }

    pub fn validate(&self, x: &DenseMatrix, r: usize) -> Result<()> {
        self.refine.validate()?;
        match self.kind {
            HeuristicKind::Ms1 => check_rank(x, r, true),
            HeuristicKind::Ms2 => {
                check_rank(x, r, true)?;
                self.ms2.validate()
            }
            HeuristicKind::Sa => {
                check_rank(x, r, false)?;
                self.sa.validate(r)
            }
            HeuristicKind::Rbr => {
                check_rank(x, r, false)?;
                self.rbr.validate()
            }
            HeuristicKind::Hybrid => {
                check_rank(x, r, false)?;
                self.rbr.validate()?;
                self.sa.validate(r)
            }
        }
    }

    /// One run with seed `seed`.
    pub fn run(&self, x: &DenseMatrix, r: usize, seed: u64) -> Result<Outcome> {
        self.validate(x, r)?;
        let mut ctx = Context::new(x, self.solver, self.max_sweeps)?;
        match self.kind {
            HeuristicKind::Ms1 => ms1_in(&mut ctx, r, &self.refine, self.ms1_init, seed),
            HeuristicKind::Ms2 => ms2_in(&mut ctx, r, &self.ms2, &self.refine, seed),
            HeuristicKind::Sa => annealing::sa_in(&mut ctx, r, &self.sa, &self.refine, seed, None),
            HeuristicKind::Rbr => rank_by_rank::rbr_in(&mut ctx, r, &self.rbr, &self.refine, seed),
            HeuristicKind::Hybrid => {
                rank_by_rank::hybrid_in(&mut ctx, r, &self.rbr, &self.sa, &self.refine, seed)
            }
        }
    }
}

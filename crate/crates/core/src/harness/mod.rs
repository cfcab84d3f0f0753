//! Multi-run experiments: stop rules, success accounting, `x/y (t)` cells,
//! parameter sweeps and the table presets.
//!
//! Run `i` of an experiment always uses seed `base_seed + i`, so the executed
//! runs and their outcomes do not depend on the number of workers.

mod tables;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{benchmark_registry, BenchmarkEntry};
use crate::heuristics::{HeuristicSpec, EXACT_TOL};
use crate::linalg::{numeric_rank, RANK_TOLERANCE};
use crate::matrix::DenseMatrix;

pub use tables::{
    sweep, table_preset, MatrixCase, Scale, SweepAxis, SweepPoint, SweepRow, SweepTable, TableId,
    TablePlan,
};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "EXACTNMF_WORKERS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run_index: u64,
    pub seed: u64,
    pub success: bool,
    pub final_error: f64,
    /// Seconds.
    pub elapsed: f64,
    pub sweeps: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub matrix: String,
    pub r: usize,
    pub heuristic: HeuristicSpec,
    pub tol: f64,
    pub trials: Vec<TrialRecord>,
    pub successes: usize,
    pub runs: usize,
    /// Total elapsed time of all runs divided by the number of successes.
    pub mean_time_per_success: Option<f64>,
}

impl BenchmarkReport {
    fn from_trials(matrix: &str, r: usize, heuristic: HeuristicSpec, tol: f64, mut trials: Vec<TrialRecord>) -> Self {
        trials.sort_by_key(|t| t.run_index);
        let successes = trials.iter().filter(|t| t.success).count();
        let total: f64 = trials.iter().map(|t| t.elapsed).sum();
        Self {
            matrix: matrix.to_string(),
            r,
            heuristic,
            tol,
            runs: trials.len(),
            successes,
            mean_time_per_success: (successes > 0).then(|| total / successes as f64),
            trials,
        }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.final_error).collect()
    }

    /// One JSON object per trial, tagged with the experiment it belongs to.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.trials {
            let line = serde_json::json!({
                "matrix": self.matrix,
                "r": self.r,
                "heuristic": self.heuristic.kind,
                "init": self.heuristic.init(),
                "solver": self.heuristic.solver.kind,
                "run_index": t.run_index,
                "seed": t.seed,
                "success": t.success,
                "final_error": t.final_error,
                "elapsed": t.elapsed,
                "sweeps": t.sweeps,
            });
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Run limits and stop rule of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub max_runs: usize,
    pub target_successes: usize,
    pub check_every: usize,
}

impl Protocol {
    /// Up to 100 runs, stop after 5 successes, checked every 10 runs.
    pub const TABLE2: Protocol = Protocol {
        max_runs: 100,
        target_successes: 5,
        check_every: 10,
    };

    /// Up to 1000 runs, stop after 100 successes, checked every 50 runs.
    pub const TABLE5: Protocol = Protocol {
        max_runs: 1000,
        target_successes: 100,
        check_every: 50,
    };

    pub fn new(max_runs: usize, target_successes: usize, check_every: usize) -> Result<Self> {
        let p = Self {
            max_runs,
            target_successes,
            check_every,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.check_every == 0 || self.max_runs < self.check_every {
            return Err(Error::InvalidConfig(format!(
                "protocol needs max_runs >= check_every >= 1, got {} and {}",
                self.max_runs, self.check_every
            )));
        }
        Ok(())
    }

    /// Desk-scale version with a twentieth of the runs and successes.
    pub fn small(&self) -> Self {
        let check_every = (self.check_every / 10).max(1);
        Self {
            max_runs: (self.max_runs / 20).max(check_every),
            target_successes: (self.target_successes / 20).max(1),
            check_every,
        }
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_one(x: &DenseMatrix, r: usize, spec: &HeuristicSpec, tol: f64, base_seed: u64, index: u64) -> Result<TrialRecord> {
    let seed = base_seed.wrapping_add(index);
    let start = Instant::now();
    let out = spec.run(x, r, seed)?;
    Ok(TrialRecord {
        run_index: index,
        seed,
        success: out.error <= tol,
        final_error: out.error,
        elapsed: start.elapsed().as_secs_f64(),
        sweeps: out.sweeps,
    })
}

#[cfg(feature = "parallel")]
fn run_batch(
    pool: Option<&rayon::ThreadPool>,
    x: &DenseMatrix,
    r: usize,
    spec: &HeuristicSpec,
    tol: f64,
    base_seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    match pool {
        Some(pool) => pool.install(|| {
            range
                .into_par_iter()
                .map(|i| run_one(x, r, spec, tol, base_seed, i))
                .collect()
        }),
        None => range.map(|i| run_one(x, r, spec, tol, base_seed, i)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_batch(
    _pool: Option<&()>,
    x: &DenseMatrix,
    r: usize,
    spec: &HeuristicSpec,
    tol: f64,
    base_seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Vec<TrialRecord>> {
    range.map(|i| run_one(x, r, spec, tol, base_seed, i)).collect()
}

#[cfg(feature = "parallel")]
fn make_pool(workers: usize) -> Result<Option<rayon::ThreadPool>> {
    if workers <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn make_pool(_workers: usize) -> Result<Option<()>> {
    Ok(None)
}

/// Runs `spec` on `x` in batches of `check_every` runs until the target
/// number of successes is reached after a batch, or `max_runs` runs are done.
#[allow(clippy::too_many_arguments)]
pub fn run_trials(
    name: &str,
    x: &DenseMatrix,
    r: usize,
    spec: &HeuristicSpec,
    protocol: Protocol,
    tol: f64,
    base_seed: u64,
    workers: usize,
) -> Result<BenchmarkReport> {
    protocol.validate()?;
    spec.validate(x, r)?;
    let pool = make_pool(workers)?;
    let mut trials = Vec::new();
    let mut successes = 0;
    let mut start = 0usize;
    while start < protocol.max_runs {
        let end = (start + protocol.check_every).min(protocol.max_runs);
        let batch = run_batch(pool.as_ref(), x, r, spec, tol, base_seed, start as u64..end as u64)?;
        successes += batch.iter().filter(|t| t.success).count();
        trials.extend(batch);
        start = end;
        if successes >= protocol.target_successes {
            break;
        }
    }
    Ok(BenchmarkReport::from_trials(name, r, *spec, tol, trials))
}

/// `x/y (t)` with `t` to one decimal, or `x/y (~)` without successes.
pub fn format_cell(report: &BenchmarkReport) -> String {
    format_counts(report.successes, report.runs, report.mean_time_per_success)
}

pub fn format_counts(successes: usize, runs: usize, mean: Option<f64>) -> String {
    match mean {
        Some(t) if successes > 0 => format!("{successes}/{runs} ({t:.1})"),
        _ => format!("{successes}/{runs} (~)"),
    }
}

/// Inverse of [`format_cell`]: `(successes, runs, mean time)`.
pub fn parse_cell(cell: &str) -> Result<(usize, usize, Option<f64>)> {
    let bad = || Error::Parse {
        line: 1,
        msg: format!("not a result cell: {cell:?}"),
    };
    let (counts, rest) = cell.trim().split_once(' ').ok_or_else(bad)?;
    let (x, y) = counts.split_once('/').ok_or_else(bad)?;
    let x: usize = x.parse().map_err(|_| bad())?;
    let y: usize = y.parse().map_err(|_| bad())?;
    let inner = rest
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let t = match inner {
        "~" | "∼" => None,
        s => Some(s.parse::<f64>().map_err(|_| bad())?),
    };
    if x > y || (x > 0) != t.is_some() {
        return Err(bad());
    }
    Ok((x, y, t))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Checks the dimensions and numeric rank of one entry against its metadata.
pub fn verify_entry(entry: &BenchmarkEntry, expected_shape: (usize, usize)) -> VerifyResult {
    let shape = entry.matrix.shape();
    let rank = numeric_rank(&entry.matrix, RANK_TOLERANCE);
    let mut problems = Vec::new();
    if shape != expected_shape {
        problems.push(format!("shape {}x{} != {}x{}", shape.0, shape.1, expected_shape.0, expected_shape.1));
    }
    if rank != entry.known_rank {
        problems.push(format!("rank {rank} != {}", entry.known_rank));
    }
    if !entry.matrix.is_nonnegative() {
        problems.push("negative entries".into());
    }
    VerifyResult {
        name: entry.name.to_string(),
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{}x{}, rank {rank}", shape.0, shape.1)
        } else {
            problems.join("; ")
        },
    }
}

/// Expected `(m, n)` of every registry entry.
pub fn registry_shape(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "LEDM6" => (6, 6),
        "LEDM8" => (8, 8),
        "LEDM12" => (12, 12),
        "LEDM16" => (16, 16),
        "LEDM32" => (32, 32),
        "6-G" => (6, 6),
        "7-G" => (7, 7),
        "8-G" => (8, 8),
        "9-G" => (9, 9),
        "16-G" => (16, 16),
        "32-G" => (32, 32),
        "20-D" => (20, 12),
        "24-C" => (24, 24),
        "UDISJ4" => (16, 16),
        "UDISJ5" => (32, 32),
        "UDISJ6" => (64, 64),
        "RND1" | "RND3" => (50, 50),
        _ => return None,
    })
}

/// Self-check of every registry entry; no factorization is attempted.
pub fn verify_registry() -> Vec<VerifyResult> {
    benchmark_registry()
        .iter()
        .map(|e| match registry_shape(e.name) {
            Some(shape) => verify_entry(e, shape),
            None => VerifyResult {
                name: e.name.to_string(),
                pass: false,
                detail: "no expected shape".into(),
            },
        })
        .collect()
}

/// Default success threshold of the harness.
pub const DEFAULT_TOL: f64 = EXACT_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{ledm_integer, lookup};
    use crate::heuristics::{HeuristicKind, RefineConfig};

    fn fake_report(flags: &[bool], elapsed: f64) -> BenchmarkReport {
        let trials = flags
            .iter()
            .enumerate()
            .map(|(i, &s)| TrialRecord {
                run_index: i as u64,
                seed: i as u64,
                success: s,
                final_error: if s { 0.0 } else { 0.1 },
                elapsed,
                sweeps: 1,
            })
            .collect();
        BenchmarkReport::from_trials("X", 2, HeuristicSpec::new(HeuristicKind::Ms1), 1e-6, trials)
    }

    #[test]
    fn cells() {
        let mut flags = vec![true; 7];
        flags.extend([false; 3]);
        let rep = fake_report(&flags, 3.2 * 7.0 / 10.0);
        assert_eq!(format_cell(&rep), "7/10 (3.2)");
        assert_eq!(format_cell(&fake_report(&[false; 100], 1.0)), "0/100 (~)");
        assert_eq!(format_counts(100, 100, Some(1.4)), "100/100 (1.4)");
    }

    #[test]
    fn cell_parse_round_trip() {
        assert_eq!(parse_cell("7/10 (3.2)").unwrap(), (7, 10, Some(3.2)));
        assert_eq!(parse_cell("0/100 (~)").unwrap(), (0, 100, None));
        assert_eq!(parse_cell("0/100 (∼)").unwrap(), (0, 100, None));
        for bad in ["7/10", "7-10 (3.2)", "11/10 (1.0)", "0/10 (1.0)", "3/10 (~)", "3/10 (x)"] {
            assert!(parse_cell(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn protocol_presets_and_validation() {
        assert_eq!(
            (Protocol::TABLE2.max_runs, Protocol::TABLE2.target_successes, Protocol::TABLE2.check_every),
            (100, 5, 10)
        );
        assert_eq!(
            (Protocol::TABLE5.max_runs, Protocol::TABLE5.target_successes, Protocol::TABLE5.check_every),
            (1000, 100, 50)
        );
        assert!(Protocol::new(5, 1, 10).is_err());
        assert!(Protocol::new(5, 1, 0).is_err());
        let s = Protocol::TABLE5.small();
        assert!(s.validate().is_ok());
        assert!(s.max_runs < 1000);
    }

    #[test]
    fn stop_rule_applies_at_batch_boundaries() {
        let x = ledm_integer(6).unwrap();
        let spec = HeuristicSpec::new(HeuristicKind::Rbr).with_refine(RefineConfig::iterations(1000));
        let rep = run_trials("LEDM6", &x, 5, &spec, Protocol::new(12, 2, 4).unwrap(), 1e-6, 0, 1).unwrap();
        assert_eq!(rep.runs, 4);
        assert!(rep.successes >= 2);
        assert_eq!(rep.trials.iter().map(|t| t.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3]);

        // Unreachable target: all runs, last batch truncated.
        let rep = run_trials("LEDM6", &x, 2, &spec, Protocol::new(10, 1, 4).unwrap(), 1e-6, 100, 1).unwrap();
        assert_eq!((rep.successes, rep.runs), (0, 10));
        assert_eq!(rep.mean_time_per_success, None);
        assert_eq!(rep.trials.last().unwrap().seed, 109);
    }

    #[test]
    fn invalid_rank_surfaces_before_running() {
        let x = ledm_integer(6).unwrap();
        let spec = HeuristicSpec::new(HeuristicKind::Ms1);
        assert!(run_trials("LEDM6", &x, 6, &spec, Protocol::TABLE2, 1e-6, 0, 1).is_err());
    }

    #[test]
    fn jsonl_has_one_line_per_trial() {
        let rep = fake_report(&[true, false, true], 0.5);
        let mut buf = Vec::new();
        rep.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(v["heuristic"], "ms1");
        assert_eq!(v["init"], "sparse11");
        assert_eq!(v["solver"], "ahals");
    }

    #[test]
    fn registry_verifies_and_detects_corruption() {
        assert!(verify_registry().iter().all(|v| v.pass));
        let mut e = lookup("LEDM8").unwrap();
        e.matrix[(2, 5)] += 1.0;
        let v = verify_entry(&e, (8, 8));
        assert!(!v.pass);
        assert!(v.detail.contains("rank"));
    }

    #[test]
    fn workers_env_parsing() {
        assert!(workers_from_env() >= 1);
    }
}

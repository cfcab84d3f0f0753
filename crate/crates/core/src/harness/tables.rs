use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{format_cell, run_trials, BenchmarkReport, Protocol};
use crate::error::{Error, Result};
use crate::generators::{benchmark_registry, conjectured_ngon_rank, regular_ngon_slack};
use crate::heuristics::{HeuristicKind, HeuristicSpec, RefineConfig};
use crate::init::InitStrategy;
use crate::matrix::DenseMatrix;
use crate::solvers::{Solver, SolverBudget, SolverKind};

/// A matrix and the rank at which it is factorized.
#[derive(Clone, Debug)]
pub struct MatrixCase {
    pub name: String,
    pub matrix: DenseMatrix,
    pub r: usize,
}

impl MatrixCase {
    /// Every registry entry at its known (or best known) nonnegative rank.
    pub fn registry() -> Vec<MatrixCase> {
        benchmark_registry()
            .into_iter()
            .map(|e| MatrixCase {
                name: e.name.to_string(),
                r: e.known_nnrank.target(),
                matrix: e.matrix,
            })
            .collect()
    }
}

/// One column of a sweep table.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub label: String,
    pub spec: HeuristicSpec,
}

/// A named parameter and the values it takes.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    Alpha(Vec<f64>),
    RefineSweeps(Vec<u64>),
    RefineSeconds(Vec<f64>),
    SaTEnd(Vec<f64>),
    SaKn(Vec<(usize, u64)>),
    SaJ(Vec<usize>),
    RbrKn(Vec<(usize, u64)>),
    Ms2Kn(Vec<(usize, u64)>),
    Init(Vec<InitStrategy>),
    Solver(Vec<SolverKind>),
    Heuristic(Vec<HeuristicKind>),
}

fn parse_list<T: FromStr>(param: &str, values: &str) -> Result<Vec<T>> {
    let out: Vec<T> = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("bad value {s:?} for {param}")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!("empty grid for {param}")));
    }
    Ok(out)
}

fn parse_kn(param: &str, values: &str) -> Result<Vec<(usize, u64)>> {
    let pairs: Vec<String> = parse_list(param, values)?;
    pairs
        .iter()
        .map(|p| {
            let (k, n) = p
                .split_once(['x', 'X', ':'])
                .ok_or_else(|| Error::InvalidConfig(format!("expected KxN, got {p:?}")))?;
            let k = k.parse().map_err(|_| Error::InvalidConfig(format!("bad K in {p:?}")))?;
            let n = n.parse().map_err(|_| Error::InvalidConfig(format!("bad N in {p:?}")))?;
            Ok((k, n))
        })
        .collect()
}

impl SweepAxis {
    pub const PARAMS: [&'static str; 11] = [
        "alpha",
        "refine-sweeps",
        "refine-seconds",
        "sa-tend",
        "sa-kn",
        "sa-j",
        "rbr-kn",
        "ms2-kn",
        "init",
        "solver",
        "heuristic",
    ];

    /// Parses `--param <name> --values <comma list>`; `K×N` grids use `10x50`.
    pub fn parse(param: &str, values: &str) -> Result<Self> {
        Ok(match param {
            "alpha" => SweepAxis::Alpha(parse_list(param, values)?),
            "refine-sweeps" => SweepAxis::RefineSweeps(parse_list(param, values)?),
            "refine-seconds" => SweepAxis::RefineSeconds(parse_list(param, values)?),
            "sa-tend" => SweepAxis::SaTEnd(parse_list(param, values)?),
            "sa-kn" => SweepAxis::SaKn(parse_kn(param, values)?),
            "sa-j" => SweepAxis::SaJ(parse_list(param, values)?),
            "rbr-kn" => SweepAxis::RbrKn(parse_kn(param, values)?),
            "ms2-kn" => SweepAxis::Ms2Kn(parse_kn(param, values)?),
            "init" => SweepAxis::Init(parse_list(param, values)?),
            "solver" => SweepAxis::Solver(parse_list(param, values)?),
            "heuristic" => SweepAxis::Heuristic(parse_list(param, values)?),
            other => {
                return Err(Error::UnknownName {
                    name: other.to_string(),
                    expected: Self::PARAMS.join(", "),
                })
            }
        })
    }

    /// Grid points obtained by varying `base` along this axis.
    pub fn points(&self, base: &HeuristicSpec) -> Vec<SweepPoint> {
        let with = |label: String, f: &dyn Fn(&mut HeuristicSpec)| {
            let mut spec = *base;
            f(&mut spec);
            SweepPoint { label, spec }
        };
        match self {
            SweepAxis::Alpha(v) => v
                .iter()
                .map(|&a| with(format!("alpha={a}"), &|s| s.refine.alpha = a))
                .collect(),
            SweepAxis::RefineSweeps(v) => v
                .iter()
                .map(|&n| with(format!("sweeps={n}"), &|s| s.refine.budget = SolverBudget::Iterations(n)))
                .collect(),
            SweepAxis::RefineSeconds(v) => v
                .iter()
                .map(|&t| {
                    with(format!("dt={t}"), &|s| {
                        s.refine.budget = SolverBudget::WallTime(Duration::from_secs_f64(t))
                    })
                })
                .collect(),
            SweepAxis::SaTEnd(v) => v
                .iter()
                .map(|&t| with(format!("Tend={t:e}"), &|s| s.sa.t_end = t))
                .collect(),
            SweepAxis::SaKn(v) => v
                .iter()
                .map(|&(k, n)| {
                    with(format!("K={k},N={n}"), &|s| {
                        s.sa.k = k;
                        s.sa.n = n;
                    })
                })
                .collect(),
            SweepAxis::SaJ(v) => v.iter().map(|&j| with(format!("J={j}"), &|s| s.sa.j = j)).collect(),
            SweepAxis::RbrKn(v) => v
                .iter()
                .map(|&(k, n)| {
                    with(format!("K={k},N={n}"), &|s| {
                        s.rbr.k = k;
                        s.rbr.n = n;
                    })
                })
                .collect(),
            SweepAxis::Ms2Kn(v) => v
                .iter()
                .map(|&(k, n)| {
                    with(format!("MS2({k},{n})"), &|s| {
                        s.ms2.k = k;
                        s.ms2.n = n;
                    })
                })
                .collect(),
            SweepAxis::Init(v) => v
                .iter()
                .map(|&i| with(i.name().to_string(), &|s| *s = s.with_init(i)))
                .collect(),
            SweepAxis::Solver(v) => v
                .iter()
                .map(|&k| with(k.name().to_string(), &|s| s.solver = Solver::new(k)))
                .collect(),
            SweepAxis::Heuristic(v) => v
                .iter()
                .map(|&k| with(k.label().to_string(), &|s| s.kind = k))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub matrix: String,
    pub cells: Vec<BenchmarkReport>,
}

/// Reports laid out with matrices as rows and grid points as columns.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        if !self.title.is_empty() {
            s.push_str(&format!("### {}\n\n", self.title));
        }
        s.push_str("| |");
        for c in &self.columns {
            s.push_str(&format!(" {c} |"));
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(self.columns.len()));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&format!("| {} |", row.matrix));
            for cell in &row.cells {
                s.push_str(&format!(" {} |", format_cell(cell)));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["matrix".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.matrix.clone()];
            rec.extend(row.cells.iter().map(format_cell));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for row in &self.rows {
            for cell in &row.cells {
                cell.write_jsonl(&mut out)?;
            }
        }
        Ok(())
    }
}

/// Runs every grid point on every matrix. `progress` is called after each
/// finished report.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    title: &str,
    cases: &[MatrixCase],
    points: &[SweepPoint],
    protocol: Protocol,
    tol: f64,
    base_seed: u64,
    workers: usize,
    mut progress: impl FnMut(&SweepPoint, &BenchmarkReport),
) -> Result<SweepTable> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(cases.len());
    for case in cases {
        let mut cells = Vec::with_capacity(points.len());
        for p in points {
            let rep = run_trials(&case.name, &case.matrix, case.r, &p.spec, protocol, tol, base_seed, workers)?;
            progress(p, &rep);
            cells.push(rep);
        }
        rows.push(SweepRow {
            matrix: case.name.clone(),
            cells,
        });
    }
    Ok(SweepTable {
        title: title.to_string(),
        columns: points.iter().map(|p| p.label.clone()).collect(),
        rows,
    })
}

/// The benchmark tables that can be regenerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    T2,
    T3,
    T4,
    T5,
    T6,
    A,
    B,
    C,
    D,
}

impl TableId {
    pub const ALL: [TableId; 9] = [
        TableId::T2,
        TableId::T3,
        TableId::T4,
        TableId::T5,
        TableId::T6,
        TableId::A,
        TableId::B,
        TableId::C,
        TableId::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::T2 => "t2",
            TableId::T3 => "t3",
            TableId::T4 => "t4",
            TableId::T5 => "t5",
            TableId::T6 => "t6",
            TableId::A => "a",
            TableId::B => "b",
            TableId::C => "c",
            TableId::D => "d",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                name: s.to_string(),
                expected: "t2, t3, t4, t5, t6, a, b, c, d".into(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Small,
    Paper,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(Scale::Small),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::UnknownName {
                name: s.to_string(),
                expected: "small, paper".into(),
            }),
        }
    }
}

/// Everything needed to regenerate one table.
#[derive(Clone, Debug)]
pub struct TablePlan {
    pub id: TableId,
    pub title: String,
    pub cases: Vec<MatrixCase>,
    pub points: Vec<SweepPoint>,
    pub protocol: Protocol,
}

const LARGE_NGONS: [usize; 7] = [110, 120, 130, 140, 150, 160, 170];

/// The matrices, grid and protocol of table `id`, with `refine` as the
/// final-refinement setting of every heuristic.
pub fn table_preset(id: TableId, scale: Scale, refine: RefineConfig) -> Result<TablePlan> {
    let base = |kind| HeuristicSpec::new(kind).with_refine(refine);
    let inits = InitStrategy::ALL.to_vec();
    let (title, points, protocol) = match id {
        TableId::T2 => {
            let mut points = vec![SweepPoint {
                label: "MS1".into(),
                spec: base(HeuristicKind::Ms1),
            }];
            points.extend(
                SweepAxis::Ms2Kn(vec![(100, 20), (200, 20), (100, 40), (200, 40)]).points(&base(HeuristicKind::Ms2)),
            );
            ("Multi-start heuristics", points, Protocol::TABLE2)
        }
        TableId::T3 => (
            "Initialization strategies with MS2",
            SweepAxis::Init(inits).points(&base(HeuristicKind::Ms2)),
            Protocol::TABLE2,
        ),
        TableId::T4 => (
            "NMF solvers with MS2",
            SweepAxis::Solver(SolverKind::ALL.to_vec()).points(&base(HeuristicKind::Ms2)),
            Protocol::TABLE2,
        ),
        TableId::T5 => (
            "Comparison of the heuristics",
            SweepAxis::Heuristic(HeuristicKind::ALL.to_vec()).points(&base(HeuristicKind::Ms1)),
            Protocol::TABLE5,
        ),
        TableId::T6 => (
            "Hybrid on large regular n-gons",
            vec![SweepPoint {
                label: "Hybrid".into(),
                spec: base(HeuristicKind::Hybrid),
            }],
            Protocol::TABLE5,
        ),
        TableId::A => (
            "Values of alpha with MS2",
            SweepAxis::Alpha(vec![0.9999, 0.99, 0.9, 0.5]).points(&base(HeuristicKind::Ms2)),
            Protocol::TABLE2,
        ),
        TableId::B => (
            "Initialization strategies with SA",
            SweepAxis::Init(inits).points(&base(HeuristicKind::Sa)),
            Protocol::TABLE2,
        ),
        TableId::C => (
            "Initialization strategies with RBR",
            SweepAxis::Init(inits).points(&base(HeuristicKind::Rbr)),
            Protocol::TABLE2,
        ),
        TableId::D => (
            "Initialization strategies with Hybrid",
            SweepAxis::Init(inits).points(&base(HeuristicKind::Hybrid)),
            Protocol::TABLE2,
        ),
    };
    let cases = if id == TableId::T6 {
        LARGE_NGONS
            .iter()
            .map(|&n| {
                Ok(MatrixCase {
                    name: format!("{n}-G"),
                    matrix: regular_ngon_slack(n)?,
                    r: conjectured_ngon_rank(n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        MatrixCase::registry()
    };
    let protocol = match scale {
        Scale::Paper => protocol,
        Scale::Small => protocol.small(),
    };
    Ok(TablePlan {
        id,
        title: title.to_string(),
        cases,
        points,
        protocol,
    })
}

//! `exactnmf` command-line front end.
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use exactnmf::generators::{self, lookup, registry_names};
use exactnmf::harness::{
    self, sweep, table_preset, verify_registry, MatrixCase, Protocol, Scale, SweepAxis, TableId,
};
use exactnmf::heuristics::{HeuristicKind, HeuristicSpec, RefineConfig, EXACT_TOL};
use exactnmf::io::{read_matrix, to_text, write_csv, write_matrix};
use exactnmf::linalg::{kronecker, numeric_rank, RANK_TOLERANCE};
use exactnmf::{DenseMatrix, InitStrategy, Solver, SolverBudget, SolverKind};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;

#[derive(Parser)]
#[command(name = "exactnmf", version, about = "Exact nonnegative matrix factorization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark or parametric matrix.
    Generate(GenerateArgs),
    /// Run one heuristic once and write W, H and a run record.
    Factorize(FactorizeArgs),
    /// Regenerate a benchmark table.
    Bench(BenchArgs),
    /// Sweep one parameter over a set of matrices.
    Sweep(SweepArgs),
    /// Check every registry matrix against its metadata.
    Verify,
    /// Print the numeric rank of a matrix.
    Rank(RankArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ledm,
    Ngon,
    GenericNgon,
    Udisj,
    Corr,
    NestedSquares,
    NestedSquaresKron,
    Random,
    Fawzi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct GenerateArgs {
    /// Registry name (e.g. LEDM6, 16-G, UDISJ5).
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    name: Option<String>,
    /// Parametric family.
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Size parameter (LEDM length, polygon sides, bit count).
    #[arg(long)]
    n: Option<usize>,
    /// Rows of a random product.
    #[arg(long)]
    m: Option<usize>,
    /// Inner rank of a random product.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Nested-squares parameter; defaults to sqrt(2) - 0.9.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from a .csv extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Clone)]
struct RefineArgs {
    /// Required relative decrease factor per refinement round.
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    /// Fixed sweeps per refinement round (deterministic mode).
    #[arg(long, conflicts_with = "refine_seconds")]
    refine_sweeps: Option<u64>,
    /// Wall-clock seconds per refinement round (default 1).
    #[arg(long)]
    refine_seconds: Option<f64>,
    /// Relative error counted as exact.
    #[arg(long, default_value_t = EXACT_TOL)]
    tol: f64,
}

impl RefineArgs {
    fn config(&self) -> anyhow::Result<RefineConfig> {
        let budget = match (self.refine_sweeps, self.refine_seconds) {
            (Some(n), _) => SolverBudget::Iterations(n),
            (None, Some(t)) if t > 0.0 && t.is_finite() => SolverBudget::WallTime(Duration::from_secs_f64(t)),
            (None, Some(t)) => bail!(usage(format!("--refine-seconds must be positive, got {t}"))),
            (None, None) => SolverBudget::WallTime(Duration::from_secs(1)),
        };
        let cfg = RefineConfig {
            alpha: self.alpha,
            budget,
            tol: self.tol,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Args, Clone)]
struct HeuristicArgs {
    #[arg(long, default_value = "ahals")]
    solver: SolverKind,
    /// Initialization strategy for every phase (defaults per heuristic).
    #[arg(long)]
    init: Option<InitStrategy>,
    #[arg(long)]
    ms2_k: Option<usize>,
    #[arg(long)]
    ms2_n: Option<u64>,
    #[arg(long)]
    sa_t0: Option<f64>,
    #[arg(long)]
    sa_tend: Option<f64>,
    #[arg(long)]
    sa_levels: Option<usize>,
    #[arg(long)]
    sa_k: Option<usize>,
    #[arg(long)]
    sa_n: Option<u64>,
    #[arg(long)]
    sa_j: Option<usize>,
    #[arg(long)]
    rbr_k: Option<usize>,
    #[arg(long)]
    rbr_n: Option<u64>,
    /// Hard cap on solver sweeps per run.
    #[arg(long)]
    max_sweeps: Option<u64>,
    #[command(flatten)]
    refine: RefineArgs,
}

impl HeuristicArgs {
    fn spec(&self, kind: HeuristicKind) -> anyhow::Result<HeuristicSpec> {
        let mut s = HeuristicSpec::new(kind)
            .with_refine(self.refine.config()?)
            .with_solver(Solver::new(self.solver));
        if let Some(init) = self.init {
            s = s.with_init(init);
        }
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(s.ms2.k, self.ms2_k);
        set!(s.ms2.n, self.ms2_n);
        set!(s.sa.t0, self.sa_t0);
        set!(s.sa.t_end, self.sa_tend);
        set!(s.sa.levels, self.sa_levels);
        set!(s.sa.k, self.sa_k);
        set!(s.sa.n, self.sa_n);
        set!(s.sa.j, self.sa_j);
        set!(s.rbr.k, self.rbr_k);
        set!(s.rbr.n, self.rbr_n);
        s.max_sweeps = self.max_sweeps;
        Ok(s)
    }
}

#[derive(Args)]
struct FactorizeArgs {
    /// Matrix file or registry name.
    #[arg(long, visible_alias = "name")]
    matrix: String,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value = "rbr")]
    heuristic: HeuristicKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for W.mat, H.mat and run.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    heuristic_args: HeuristicArgs,
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    #[arg(long)]
    max_runs: Option<usize>,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    check_every: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; EXACTNMF_WORKERS or the core count when omitted.
    #[arg(long)]
    workers: Option<usize>,
    /// Restrict to these registry matrices (comma separated).
    #[arg(long, value_delimiter = ',')]
    matrices: Vec<String>,
}

impl ProtocolArgs {
    fn protocol(&self, base: Protocol) -> anyhow::Result<Protocol> {
        let p = Protocol {
            max_runs: self.max_runs.unwrap_or(base.max_runs),
            target_successes: self.target.unwrap_or(base.target_successes),
            check_every: self.check_every.unwrap_or(base.check_every).min(self.max_runs.unwrap_or(usize::MAX)),
        };
        p.validate().map_err(usage)?;
        Ok(p)
    }

    fn workers(&self) -> usize {
        self.workers.filter(|&w| w > 0).unwrap_or_else(harness::workers_from_env)
    }

    fn filter(&self, cases: Vec<MatrixCase>) -> anyhow::Result<Vec<MatrixCase>> {
        if self.matrices.is_empty() {
            return Ok(cases);
        }
        let mut out = Vec::new();
        for want in &self.matrices {
            match cases.iter().find(|c| c.name.eq_ignore_ascii_case(want)) {
                Some(c) => out.push(c.clone()),
                None => bail!(usage(format!(
                    "unknown matrix {want:?}; expected one of: {}",
                    cases.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
                ))),
            }
        }
        Ok(out)
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    table: TableId,
    #[arg(long, default_value = "small")]
    scale: Scale,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    refine: RefineArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolPreset {
    T2,
    T5,
}

#[derive(Args)]
struct SweepArgs {
    /// One of: alpha, refine-sweeps, refine-seconds, sa-tend, sa-kn, sa-j,
    /// rbr-kn, ms2-kn, init, solver, heuristic.
    #[arg(long)]
    param: String,
    /// Comma-separated grid; K×N grids are written as 10x50.
    #[arg(long)]
    values: String,
    #[arg(long, default_value = "ms2")]
    heuristic: HeuristicKind,
    #[arg(long, value_enum, default_value = "t2")]
    protocol_preset: ProtocolPreset,
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    heuristic_args: HeuristicArgs,
}

#[derive(Args)]
struct RankArgs {
    /// Matrix file or registry name.
    #[arg(long, visible_alias = "name")]
    matrix: String,
    /// Singular values below tol times the largest one are dropped.
    #[arg(long, default_value_t = RANK_TOLERANCE)]
    tol: f64,
}

/// Error wrapper that maps to the usage exit code.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(e.to_string()))
}

/// Library errors caused by bad flags count as usage errors.
fn classify(e: exactnmf::Error) -> anyhow::Error {
    match e {
        exactnmf::Error::UnknownName { .. }
        | exactnmf::Error::InvalidConfig(_)
        | exactnmf::Error::InvalidRank { .. } => usage(e),
        other => other.into(),
    }
}

fn load_matrix(spec: &str) -> anyhow::Result<(String, DenseMatrix)> {
    let path = Path::new(spec);
    if path.is_file() {
        let m = read_matrix(path).with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok((name, m));
    }
    match lookup(spec) {
        Ok(e) => Ok((e.name.to_string(), e.matrix)),
        Err(_) => Err(usage(format!(
            "{spec:?} is neither a file nor a registry name; registry names: {}",
            registry_names().join(", ")
        ))),
    }
}

fn generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--{flag} is required for this family")));
    let m = match (&args.name, args.family) {
        (Some(name), _) => lookup(name).map_err(classify)?.matrix,
        (None, Some(family)) => match family {
            Family::Ledm => generators::ledm_integer(need(args.n, "n")?),
            Family::Ngon => generators::regular_ngon_slack(need(args.n, "n")?),
            Family::GenericNgon => generators::generic_ngon_slack(need(args.n, "n")?, args.seed),
            Family::Udisj => generators::udisj_y(need(args.n, "n")?),
            Family::Corr => generators::corr_submatrix(need(args.n, "n")?),
            Family::NestedSquares => {
                generators::nested_squares(args.a.unwrap_or_else(generators::nested_squares_parameter))
            }
            Family::NestedSquaresKron => {
                generators::nested_squares(args.a.unwrap_or_else(generators::nested_squares_parameter))
                    .and_then(|a| kronecker(&a, &a))
            }
            Family::Random => generators::random_product(
                need(args.m, "m")?,
                need(args.n, "n")?,
                need(args.r, "r")?,
                args.density,
                args.seed,
            )
            .map(|p| p.x),
            Family::Fawzi => Ok(generators::fawzi_counterexample()),
        }
        .map_err(classify)?,
        (None, None) => bail!(usage("one of --name or --family is required")),
    };
    let csv = match args.format {
        Some(Format::Csv) => true,
        Some(Format::Text) => false,
        None => args
            .out
            .as_ref()
            .and_then(|p| p.extension())
            .is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    match &args.out {
        Some(path) => {
            let f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            if csv {
                write_csv(&m, f)?;
            } else {
                let mut f = f;
                f.write_all(to_text(&m).as_bytes())?;
            }
            eprintln!("wrote {}x{} matrix to {}", m.rows(), m.cols(), path.display());
        }
        None => {
            let stdout = std::io::stdout().lock();
            if csv {
                write_csv(&m, stdout)?;
            } else {
                let mut stdout = stdout;
                stdout.write_all(to_text(&m).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn factorize(args: &FactorizeArgs) -> anyhow::Result<bool> {
    let (name, x) = load_matrix(&args.matrix)?;
    let spec = args.heuristic_args.spec(args.heuristic)?;
    spec.validate(&x, args.r).map_err(classify)?;
    let start = Instant::now();
    let out = spec.run(&x, args.r, args.seed).map_err(classify)?;
    let elapsed = start.elapsed().as_secs_f64();
    let success = out.error <= spec.refine.tol;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let record = serde_json::json!({
        "matrix": name,
        "m": x.rows(),
        "n": x.cols(),
        "r": args.r,
        "heuristic": spec.kind,
        "init": spec.init(),
        "solver": spec.solver.kind,
        "seed": args.seed,
        "error": out.error,
        "sweeps": out.sweeps,
        "elapsed_s": elapsed,
        "success": success,
    });
    if success {
        write_matrix(out.pair.w(), &args.out.join("W.mat"))?;
        write_matrix(out.pair.h(), &args.out.join("H.mat"))?;
    }
    let mut f = BufWriter::new(File::create(args.out.join("run.json"))?);
    serde_json::to_writer_pretty(&mut f, &record)?;
    f.write_all(b"\n")?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(success)
}

fn write_table_outputs(dir: &Path, stem: &str, table: &harness::SweepTable, meta: serde_json::Value) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(format!("{stem}.md")), table.to_markdown())?;
    table.write_csv(BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?))?;
    let mut jsonl = BufWriter::new(File::create(dir.join(format!("{stem}.jsonl")))?);
    table.write_jsonl(&mut jsonl)?;
    jsonl.flush()?;
    fs::write(dir.join(format!("{stem}.meta.json")), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn budget_mode(refine: &RefineConfig) -> String {
    match refine.budget {
        SolverBudget::Iterations(n) => format!("iterations:{n}"),
        SolverBudget::WallTime(d) => format!("walltime:{}s", d.as_secs_f64()),
    }
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let refine = args.refine.config()?;
    let plan = table_preset(args.table, args.scale, refine).map_err(classify)?;
    let protocol = args.protocol.protocol(plan.protocol)?;
    let cases = args.protocol.filter(plan.cases)?;
    let workers = args.protocol.workers();
    eprintln!(
        "table {}: {} matrices x {} columns, protocol {:?}, {} workers",
        plan.id,
        cases.len(),
        plan.points.len(),
        protocol,
        workers
    );
    let table = sweep(&plan.title, &cases, &plan.points, protocol, refine.tol, args.protocol.seed, workers, |p, rep| {
        eprintln!("  {} {}: {}", rep.matrix, p.label, harness::format_cell(rep));
    })
    .map_err(classify)?;
    let meta = serde_json::json!({
        "table": plan.id,
        "scale": args.scale,
        "protocol": protocol,
        "refine_budget": budget_mode(&refine),
        "alpha": refine.alpha,
        "tol": refine.tol,
        "base_seed": args.protocol.seed,
    });
    write_table_outputs(&args.out, plan.id.name(), &table, meta)?;
    print!("{}", table.to_markdown());
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let axis = SweepAxis::parse(&args.param, &args.values).map_err(classify)?;
    let base = args.heuristic_args.spec(args.heuristic)?;
    let points = axis.points(&base);
    let preset = match args.protocol_preset {
        ProtocolPreset::T2 => Protocol::TABLE2,
        ProtocolPreset::T5 => Protocol::TABLE5,
    };
    let protocol = args.protocol.protocol(preset)?;
    let cases = args.protocol.filter(MatrixCase::registry())?;
    let workers = args.protocol.workers();
    let title = format!("{} sweep over {}", args.heuristic.label(), args.param);
    let table = sweep(&title, &cases, &points, protocol, base.refine.tol, args.protocol.seed, workers, |p, rep| {
        eprintln!("  {} {}: {}", rep.matrix, p.label, harness::format_cell(rep));
    })
    .map_err(classify)?;
    let meta = serde_json::json!({
        "param": args.param,
        "values": args.values,
        "heuristic": args.heuristic,
        "protocol": protocol,
        "refine_budget": budget_mode(&base.refine),
        "base_seed": args.protocol.seed,
    });
    write_table_outputs(&args.out, &format!("sweep-{}", args.param), &table, meta)?;
    print!("{}", table.to_markdown());
    Ok(())
}

fn verify() -> bool {
    let results = verify_registry();
    for v in &results {
        println!("{} {:<7} {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    results.iter().all(|v| v.pass)
}

fn rank(args: &RankArgs) -> anyhow::Result<()> {
    let (_, x) = load_matrix(&args.matrix)?;
    println!("rank {}", numeric_rank(&x, args.tol));
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate(&a)?,
        Command::Factorize(a) => {
            if !factorize(&a)? {
                eprintln!("no exact factorization found");
                return Ok(ExitCode::from(EXIT_NOT_FOUND));
            }
        }
        Command::Bench(a) => bench(&a)?,
        Command::Sweep(a) => run_sweep(&a)?,
        Command::Verify => {
            if !verify() {
                return Ok(ExitCode::from(EXIT_RUNTIME));
            }
        }
        Command::Rank(a) => rank(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}

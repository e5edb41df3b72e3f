//! `optdesign`: generate instances, solve them, and benchmark pruning variants.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad input, 3 max iterations
//! reached, 4 singular initial design.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use optdesign::bench::{run_bench, BenchConfig};
use optdesign::instances::{gen_gaussian_ellipse, gen_tightness};
use optdesign::io::{read_points_csv, write_points_csv};
use optdesign::rng::NormalStream;
use optdesign::solver::TraceRow;
use optdesign::{solve, BoundKind, DesignError, DesignMeasure, DesignProblem, Init, Realloc, SolverConfig, Status};

const EXIT_IO: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_MAX_ITERS: u8 = 3;
const EXIT_SINGULAR: u8 = 4;

#[derive(Parser)]
#[command(name = "optdesign", version, about = "D-optimum design with support-point pruning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Solve a problem read from a point CSV.
    Solve(SolveArgs),
    /// Compare pruning variants over random covering-ellipse problems.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Gaussian planar cloud lifted to (z1, z2, 1).
    Ellipse {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Worst-case instance for the screening bound, with a JSON certificate sidecar.
    Tight {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Defaults to the geometric midpoint of the admissible interval.
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    New,
    Old,
    None,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::New => BoundKind::New,
            BoundArg::Old => BoundKind::Old,
            BoundArg::None => BoundKind::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReallocArg {
    Proportional,
    Boost,
}

impl From<ReallocArg> for Realloc {
    fn from(r: ReallocArg) -> Self {
        match r {
            ReallocArg::Proportional => Realloc::Proportional,
            ReallocArg::Boost => Realloc::Boost,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    Random,
}

#[derive(Args)]
struct SolveArgs {
    /// Point CSV: one point per line, no header.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "new")]
    bound: BoundArg,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, value_enum, default_value = "proportional")]
    realloc: ReallocArg,
    #[arg(long, default_value_t = 2.0)]
    boost_factor: f64,
    #[arg(long, default_value_t = 1)]
    prune_every: usize,
    /// Defaults to 1e-9 times the dimension.
    #[arg(long)]
    prune_tol: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Append a constant 1 to every point (raw planar clouds).
    #[arg(long)]
    lift: bool,
    /// JSON-lines trace, one object per iteration.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also write the JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    init: InitArg,
    /// Seed for `--init random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "none,old,new")]
    variants: Vec<BoundArg>,
    /// Parallel replicates; OPTDESIGN_JOBS overrides. 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "proportional")]
    realloc: ReallocArg,
    #[arg(long, default_value_t = 2.0)]
    boost_factor: f64,
    /// Write the summary CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        let code = match e {
            DesignError::SingularDesign { .. } => EXIT_SINGULAR,
            DesignError::Io(_) => EXIT_IO,
            _ => EXIT_BAD_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: e.to_string() }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) })
}

fn gen(cmd: GenCommand) -> Result<u8, Failure> {
    match cmd {
        GenCommand::Ellipse { n, seed, out } => {
            let problem = gen_gaussian_ellipse(n, seed)?;
            write_points_csv(create(&out)?, &problem)?;
        }
        GenCommand::Tight { m, eps, delta, b, out } => {
            let t = gen_tightness(m, eps, delta, b)?;
            write_points_csv(create(&out)?, &t.problem)?;
            let mut side = create(&out.with_extension("json"))?;
            serde_json::to_writer_pretty(&mut side, &t.certificate()).map_err(std::io::Error::from)?;
            writeln!(side)?;
            side.flush()?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SupportEntry {
    index: usize,
    weight: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    status: Status,
    k_star: Option<usize>,
    k_10: Option<usize>,
    iterations: usize,
    q_initial: usize,
    q_final: usize,
    eps_final: f64,
    logdet_final: f64,
    certificate: f64,
    support: Vec<SupportEntry>,
    wall_time: f64,
}

fn random_init(problem: &DesignProblem, seed: u64) -> Result<Init, DesignError> {
    let mut stream = NormalStream::new(seed);
    let raw = problem.active_indices().map(|_| 0.5 + stream.uniform()).collect();
    Ok(Init::Measure(DesignMeasure::normalized(problem, raw)?))
}

fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), Failure> {
    let mut out = create(path)?;
    for row in rows {
        serde_json::to_writer(&mut out, row).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn solve_cmd(args: SolveArgs) -> Result<u8, Failure> {
    let file = File::open(&args.input)
        .map_err(|e| Failure { code: EXIT_IO, message: format!("{}: {e}", args.input.display()) })?;
    let problem = read_points_csv(file, args.lift)?;
    let cfg = SolverConfig {
        bound: args.bound.into(),
        delta: args.delta,
        prune_every: args.prune_every,
        prune_tol: args.prune_tol,
        realloc: args.realloc.into(),
        boost_factor: args.boost_factor,
        max_iters: args.max_iters,
        record_trace: args.trace.is_some(),
        shadow: None,
    };
    cfg.validate()?;
    let init = match args.init {
        InitArg::Uniform => Init::Uniform,
        InitArg::Random => random_init(&problem, args.seed)?,
    };
    let q_initial = problem.active_count();
    let (sol, trace) = solve(problem, init, &cfg)?;
    if let Some(path) = &args.trace {
        write_trace(path, &trace.rows)?;
    }
    let summary = SolveSummary {
        status: sol.status,
        k_star: trace.k_star,
        k_10: trace.k_10,
        iterations: sol.iterations,
        q_initial,
        q_final: sol.active,
        eps_final: sol.eps_final,
        logdet_final: sol.log_det(),
        certificate: sol.certificate,
        support: sol.support_weights().into_iter().map(|(index, weight)| SupportEntry { index, weight }).collect(),
        wall_time: trace.wall_time,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::from)?;
    emit(&format!("{json}\n"));
    if let Some(path) = &args.summary {
        let mut out = create(path)?;
        writeln!(out, "{json}")?;
        out.flush()?;
    }
    Ok(match sol.status {
        Status::Converged => 0,
        Status::MaxItersReached => EXIT_MAX_ITERS,
    })
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing to stdout: {e}");
        }
    }
}

fn jobs_from_env(flag: usize) -> Result<usize, Failure> {
    match std::env::var("OPTDESIGN_JOBS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| Failure {
            code: EXIT_BAD_INPUT,
            message: format!("OPTDESIGN_JOBS must be a nonnegative integer, got `{v}`"),
        }),
        _ => Ok(flag),
    }
}

fn bench_cmd(args: BenchArgs) -> Result<u8, Failure> {
    let cfg = BenchConfig {
        replicates: args.replicates,
        n: args.n,
        delta: args.delta,
        seed_base: args.seed_base,
        variants: args.variants.into_iter().map(BoundKind::from).collect(),
        jobs: jobs_from_env(args.jobs)?,
        realloc: args.realloc.into(),
        boost_factor: args.boost_factor,
        ..Default::default()
    };
    let (summary, _) = run_bench(&cfg)?;
    if summary.failures > 0 {
        eprintln!("warning: {} replicate(s) failed and were excluded", summary.failures);
    }
    emit(&summary.to_table());
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(summary.to_csv().as_bytes())?;
            out.flush()?;
        }
        None => emit(&format!("\n{}", summary.to_csv())),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(cmd) => gen(cmd),
        Command::Solve(args) => solve_cmd(args),
        Command::Bench(args) => bench_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

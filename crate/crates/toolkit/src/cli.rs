//! `sockp` command line.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 when a solver invariant
//! is violated.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sockp_core::approx::Scheme;
use sockp_core::exact::solve_exact_with;
use sockp_core::guarantees::{
    guarantee_gap_dro, guarantee_gap_normal, min_segments_dro, min_segments_normal_order, monte_carlo_feasibility,
    Distribution,
};
use sockp_core::model::{is_soc_feasible, soc_lhs, SupportForm};
use sockp_core::rkpm::{lower_bound_with, upper_bound_with, RkpmOptions, ScaleMode};
use sockp_core::{Decimal, Error, OmegaKind, SockpInstance};

use crate::bench::{
    run_bounds_bench, run_exact_bench, run_scheme_comparison, write_csv, BenchAmbiguity, BenchConfig, DeltaChoice,
    SegmentSpec,
};
use crate::generate::{generate, Family, GeneratorSpec};
use crate::io::{bits_from_string, instance_to_json, read_instance, BoundRecord, ExactRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sockp", version, about = "Cone-constrained binary knapsack solver")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Upper and lower bounds for given segment counts.
    Bounds(BoundsArgs),
    /// Optimal solution by the doubling algorithm.
    Exact(ExactArgs),
    /// Probability-gap calculators.
    Guarantee(GuaranteeArgs),
    /// Check a solution against the cone constraint and by sampling.
    Validate(ValidateArgs),
    /// Benchmark over instance families, sizes and seeds.
    Bench(BenchArgs),
    /// Upper bounds of the horizontal and vertical segment schemes.
    CompareSchemes(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Ambiguity {
    Normal,
    Chebyshev,
    DelageYe,
    Support,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SupportFormArg {
    Squared,
    Width,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DeltaArg {
    Upper,
    Lower,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Horizontal,
    Vertical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BenchKind {
    Bounds,
    Exact,
}

#[derive(Args, Debug, Clone)]
struct InstanceSource {
    /// Instance JSON file.
    #[arg(long, conflicts_with_all = ["family", "n", "seed"])]
    input: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct OmegaArgs {
    /// Confidence level.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_enum)]
    ambiguity: Option<Ambiguity>,
    /// Safety factor given directly; overrides --rho/--ambiguity.
    #[arg(long)]
    omega: Option<Decimal>,
    #[arg(long, default_value_t = 0.0)]
    gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
    /// JSON file `{"lower": [...], "upper": [...]}` for --ambiguity support.
    #[arg(long)]
    support: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "squared")]
    support_form: SupportFormArg,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Round subproblem data with this factor instead of exact scaling.
    #[arg(long)]
    scale_factor: Option<u64>,
    #[arg(long, value_enum, default_value = "horizontal")]
    scheme: SchemeArg,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    omega: OmegaArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[command(flatten)]
    omega: OmegaArgs,
    /// Segment counts, e.g. `5,10,2sqrt`.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<SegmentSpec>,
    #[arg(long, value_enum, default_value = "both")]
    delta: DeltaArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[command(flatten)]
    omega: OmegaArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GuaranteeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    rho: f64,
    /// Largest acceptable gap; reports the smallest sufficient m.
    #[arg(long)]
    target: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[command(flatten)]
    omega: OmegaArgs,
    /// Solution as a bit string, e.g. `01101`.
    #[arg(long)]
    solution: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    sample_seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_value = "SC")]
    family: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.95")]
    rho: Vec<f64>,
    /// Seeds, e.g. `1-10` or `1,4,9`.
    #[arg(long, default_value = "1-10")]
    seed: String,
    #[arg(long, value_enum, default_value = "chebyshev")]
    ambiguity: Ambiguity,
    #[arg(long, default_value_t = 0.0)]
    gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
    #[arg(long)]
    scale_factor: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "bounds")]
    kind: BenchKind,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5sqrt,sqrt,2sqrt,3sqrt,4sqrt")]
    m: Vec<SegmentSpec>,
    #[arg(long, value_enum, default_value = "both")]
    delta: DeltaArg,
    /// Write per-group means instead of per-seed rows.
    #[arg(long)]
    summary: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    m_horizontal: Vec<SegmentSpec>,
    #[arg(long, value_delimiter = ',', default_value = "10,50,100")]
    m_vertical: Vec<SegmentSpec>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses `1-10`, `3` or `1,4,9`.
pub fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty seed range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad seed `{part}`"))?),
        }
    }
    Ok(out)
}

fn load_instance(src: &InstanceSource) -> anyhow::Result<(SockpInstance, Option<Decimal>)> {
    if let Some(path) = &src.input {
        return read_instance(path);
    }
    match (src.family, src.n) {
        (Some(family), Some(n)) => Ok((generate(&GeneratorSpec { family, n, seed: src.seed })?.instance, None)),
        _ => bail!("give either --input or both --family and --n"),
    }
}

#[derive(Deserialize)]
struct SupportFile {
    lower: Vec<String>,
    upper: Vec<String>,
}

/// Resolves the safety factor and the instance the cone is posed on.
fn resolve(args: &OmegaArgs, inst: SockpInstance, file_omega: Option<Decimal>) -> anyhow::Result<(SockpInstance, Decimal)> {
    if let Some(w) = args.omega {
        return Ok((inst, OmegaKind::Explicit(w).resolve()?.omega));
    }
    if args.rho.is_none() && args.ambiguity.is_none() {
        if let Some(w) = file_omega {
            return Ok((inst, w));
        }
    }
    let rho = args.rho.unwrap_or(0.95);
    let kind = match args.ambiguity.unwrap_or(Ambiguity::Chebyshev) {
        Ambiguity::Normal => OmegaKind::Normal { rho },
        Ambiguity::Chebyshev => OmegaKind::MomentChebyshev { rho },
        Ambiguity::DelageYe => OmegaKind::DelageYe {
            rho,
            gamma1: args.gamma1,
            gamma2: args.gamma2,
        },
        Ambiguity::Support => {
            let path = args.support.as_ref().ok_or_else(|| anyhow!("--ambiguity support needs --support"))?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: SupportFile = serde_json::from_str(&text).context("malformed support file")?;
            let parse = |v: &[String]| v.iter().map(|s| s.parse::<Decimal>()).collect::<Result<Vec<_>, _>>();
            OmegaKind::SupportInterval {
                rho,
                lower: parse(&file.lower)?,
                upper: parse(&file.upper)?,
                form: match args.support_form {
                    SupportFormArg::Squared => SupportForm::SquaredBounds,
                    SupportFormArg::Width => SupportForm::Width,
                },
            }
        }
    };
    let spec = kind.resolve()?;
    Ok((spec.apply(&inst)?, spec.omega))
}

fn bench_ambiguity(grid: &GridArgs) -> anyhow::Result<BenchAmbiguity> {
    Ok(match grid.ambiguity {
        Ambiguity::Normal => BenchAmbiguity::Normal,
        Ambiguity::Chebyshev => BenchAmbiguity::Chebyshev,
        Ambiguity::DelageYe => BenchAmbiguity::DelageYe {
            gamma1: grid.gamma1,
            gamma2: grid.gamma2,
        },
        Ambiguity::Support => bail!("support-interval ambiguity needs per-item intervals; use `bounds`"),
    })
}

fn options(solver: &SolverArgs) -> anyhow::Result<RkpmOptions> {
    let scale = match solver.scale_factor {
        Some(0) => bail!("--scale-factor must be at least 1"),
        Some(f) => ScaleMode::Factor(f),
        None => ScaleMode::Exact,
    };
    let scheme = match solver.scheme {
        SchemeArg::Horizontal => Scheme::Horizontal,
        SchemeArg::Vertical => Scheme::Vertical,
    };
    Ok(RkpmOptions {
        scheme,
        scale,
        ..RkpmOptions::default()
    })
}

fn delta_choice(d: DeltaArg) -> DeltaChoice {
    match d {
        DeltaArg::Upper => DeltaChoice::Upper,
        DeltaArg::Lower => DeltaChoice::Lower,
        DeltaArg::Both => DeltaChoice::Both,
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<T: Serialize>(output: &OutputArgs, json: &impl Serialize, rows: &[T]) -> anyhow::Result<()> {
    let mut w = sink(&output.out)?;
    match output.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, json)?;
            writeln!(w)?;
        }
        Format::Csv => write_csv(rows, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BoundsOutput {
    omega: String,
    n: usize,
    bounds: Vec<BoundRecord>,
}

#[derive(Serialize)]
struct GuaranteeRow {
    n: usize,
    rho: f64,
    m: Option<u64>,
    gap_normal: Option<f64>,
    gap_dro: Option<f64>,
    target: Option<f64>,
    min_m_normal: Option<u64>,
    min_m_dro: Option<u64>,
}

#[derive(Serialize)]
struct ValidateRow {
    feasible: bool,
    lhs: f64,
    capacity: String,
    omega: String,
    profit: u64,
    samples: u64,
    satisfaction: f64,
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Gen(a) => {
            let inst = generate(&GeneratorSpec {
                family: a.family,
                n: a.n,
                seed: a.seed,
            })?
            .instance;
            let omega = if a.omega.rho.is_some() || a.omega.ambiguity.is_some() || a.omega.omega.is_some() {
                Some(resolve(&a.omega, inst.clone(), None)?.1)
            } else {
                None
            };
            let mut w = sink(&a.out)?;
            writeln!(w, "{}", instance_to_json(&inst, omega.as_ref()))?;
        }
        Command::Bounds(a) => {
            let (inst, file_omega) = load_instance(&a.source)?;
            let (inst, omega) = resolve(&a.omega, inst, file_omega)?;
            let opts = options(&a.solver)?;
            let choice = delta_choice(a.delta);
            if opts.scheme == Scheme::Vertical && choice != DeltaChoice::Upper {
                bail!(Error::InvalidParameter("the vertical scheme gives upper bounds only; use --delta upper".into()));
            }
            let mut ms: Vec<u64> = a.m.iter().map(|s| s.resolve(inst.n())).collect();
            ms.sort_unstable();
            ms.dedup();
            let mut records = Vec::new();
            for m in ms {
                if choice != DeltaChoice::Lower {
                    records.push(BoundRecord::from(&upper_bound_with(&inst, &omega, m, &opts)?));
                }
                if choice != DeltaChoice::Upper {
                    records.push(BoundRecord::from(&lower_bound_with(&inst, &omega, m, &opts)?));
                }
            }
            let json = BoundsOutput {
                omega: omega.to_string(),
                n: inst.n(),
                bounds: records.clone(),
            };
            emit(&a.output, &json, &records)?;
        }
        Command::Exact(a) => {
            let (inst, file_omega) = load_instance(&a.source)?;
            let (inst, omega) = resolve(&a.omega, inst, file_omega)?;
            let opts = options(&a.solver)?;
            if opts.scheme == Scheme::Vertical {
                bail!(Error::InvalidParameter("the doubling algorithm uses the horizontal scheme".into()));
            }
            let rep = solve_exact_with(&inst, &omega, &opts)?;
            let record = ExactRecord::from(&rep);
            emit(&a.output, &record, &record.iterations)?;
        }
        Command::Guarantee(a) => {
            if a.m.is_none() && a.target.is_none() {
                bail!(Error::InvalidParameter("give --m, --target or both".into()));
            }
            let row = GuaranteeRow {
                n: a.n,
                rho: a.rho,
                m: a.m,
                gap_normal: a.m.map(|m| guarantee_gap_normal(a.n, m, a.rho)).transpose()?,
                gap_dro: a.m.map(|m| guarantee_gap_dro(a.n, m, a.rho)).transpose()?,
                target: a.target,
                min_m_normal: a.target.map(|t| min_segments_normal_order(a.n, a.rho, t)).transpose()?,
                min_m_dro: a.target.map(|t| min_segments_dro(a.n, a.rho, t)).transpose()?,
            };
            emit(&a.output, &row, std::slice::from_ref(&row))?;
        }
        Command::Validate(a) => {
            let (inst, file_omega) = load_instance(&a.source)?;
            let (inst, omega) = resolve(&a.omega, inst, file_omega)?;
            let x = bits_from_string(&a.solution)?;
            if x.len() != inst.n() {
                bail!(Error::InvalidParameter(format!(
                    "solution has {} bits, instance has {} items",
                    x.len(),
                    inst.n()
                )));
            }
            let row = ValidateRow {
                feasible: is_soc_feasible(&x, &inst, &omega),
                lhs: soc_lhs(&x, &inst, &omega),
                capacity: inst.capacity.to_string(),
                omega: omega.to_string(),
                profit: inst.profit_of(&x),
                samples: a.samples,
                satisfaction: monte_carlo_feasibility(&x, &inst, Distribution::Normal, a.samples, a.sample_seed)?,
            };
            emit(&a.output, &row, std::slice::from_ref(&row))?;
        }
        Command::Bench(a) => {
            let mut cfg = grid_config(&a.grid)?;
            cfg.m_grid = a.m.clone();
            cfg.delta = delta_choice(a.delta);
            match a.kind {
                BenchKind::Bounds => {
                    let report = run_bounds_bench(&cfg)?;
                    if a.summary {
                        emit(&a.output, &report, &report.summary)?;
                    } else {
                        emit(&a.output, &report, &report.rows)?;
                    }
                }
                BenchKind::Exact => {
                    let report = run_exact_bench(&cfg)?;
                    if a.summary {
                        emit(&a.output, &report, &report.summary)?;
                    } else {
                        emit(&a.output, &report, &report.rows)?;
                    }
                }
            }
        }
        Command::CompareSchemes(a) => {
            let cfg = grid_config(&a.grid)?;
            let rows = run_scheme_comparison(&cfg, &a.m_horizontal, &a.m_vertical)?;
            emit(&a.output, &rows, &rows)?;
        }
    }
    Ok(())
}

fn grid_config(grid: &GridArgs) -> anyhow::Result<BenchConfig> {
    let mut cfg = BenchConfig::new(grid.family.clone(), grid.n.clone(), grid.rho.clone(), parse_seeds(&grid.seed)?);
    cfg.ambiguity = bench_ambiguity(grid)?;
    if let Some(f) = grid.scale_factor {
        if f == 0 {
            bail!("--scale-factor must be at least 1");
        }
        cfg.options.scale = ScaleMode::Factor(f);
    }
    Ok(cfg)
}

/// Exit status for an error: 3 for solver invariant violations, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(Error::Invariant(_)) = cause.downcast_ref::<Error>() {
            return EXIT_INVARIANT;
        }
    }
    EXIT_INVALID
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

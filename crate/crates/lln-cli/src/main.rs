//! `lln-lab`: compute exact truncated-moment statistics, check the integral
//! identities, classify weak-law conditions, build counterexample families,
//! and run seeded Monte Carlo experiments — all from JSON inputs to
//! deterministic CSV/JSON reports.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 a checked mathematical
//! verdict failed (an identity or bound did not hold).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;

use lln_core::counterexample::{
    build_a, build_b, build_c, build_oscillator, verify_b, verify_c, CounterexampleParams,
    OscillatorParams, B_DESK_SCALE, C_DESK_SCALE,
};
use lln_core::dist::{DiscreteDistribution, MixingFamily, TailConvention};
use lln_core::exch::classify_exchangeable;
use lln_core::feller::{
    check_identity_inverse, check_identity_parts, classify_classical, corrector_delta,
    feller_profile, geometric_grid, DEFAULT_WINDOW,
};
use lln_core::mc::{
    estimate_pi, estimate_pi_conditional, verify_feller_bound, verify_symmetric_lower_bound,
    verify_symmetrization_pi, Seed,
};
use lln_core::rational::{format_rational, parse_rational, Rational};
use lln_core::report::{estimate_json, fmt_f64, simulation_csv, SimulationRow, SIMULATION_HEADER};

const EXIT_VERDICT_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "lln-lab",
    version,
    about = "Verification laboratory for weak laws of large numbers on exact discrete laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact statistics (delta, tau, sigma, v, rho) on a t-grid
    Stats(StatsArgs),
    /// Exact integration-by-parts and inverse identity checks
    Identities(IdentitiesArgs),
    /// Classical weak-law condition report for one law
    Classify(ClassifyArgs),
    /// Exchangeable weak-law condition report for a mixing family
    ClassifyExch(ClassifyExchArgs),
    /// Build and verify a counterexample family
    #[command(subcommand)]
    Counterexample(CounterexampleCmd),
    /// Seeded Monte Carlo exceedance estimates
    Simulate(SimulateArgs),
    /// Monte Carlo verification of probabilistic bounds
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Strict,
    Nonstrict,
}

impl From<TailArg> for TailConvention {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Strict => TailConvention::Strict,
            TailArg::Nonstrict => TailConvention::Nonstrict,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct StatsArgs {
    /// Path to a distribution JSON file
    #[arg(long)]
    dist: PathBuf,
    /// Comma-separated epsilon list (rationals)
    #[arg(long, default_value = "1")]
    eps: String,
    /// Grid spec: comma-separated rationals or geo:t0:ratio:count
    #[arg(long = "t-grid", default_value = "geo:1:2:20")]
    t_grid: String,
    #[arg(long, value_enum, default_value = "strict")]
    tail: TailArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct IdentitiesArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Comma-separated M values (rationals)
    #[arg(long = "M", required = true)]
    m_list: String,
    #[arg(long, default_value = "1")]
    eps: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, default_value = "1")]
    eps: String,
    #[arg(long = "t-grid", default_value = "geo:1:2:20")]
    t_grid: String,
    /// Verdict threshold (rational)
    #[arg(long, default_value = "1/100")]
    threshold: String,
    /// Trailing window length for verdicts
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value = "strict")]
    tail: TailArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ClassifyExchArgs {
    /// Path to a mixing-family JSON file
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value = "1")]
    eps: String,
    #[arg(long = "t-grid", default_value = "geo:1:2:20")]
    t_grid: String,
    /// Statistic exceedance level theta for P(stat > theta)
    #[arg(long = "stat-threshold", default_value = "1/100")]
    stat_threshold: String,
    /// Probability threshold for the verdict rule
    #[arg(long, default_value = "1/100")]
    threshold: String,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value = "strict")]
    tail: TailArg,
    /// Emit the long CSV with the component dimension
    #[arg(long)]
    long: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum CounterexampleCmd {
    /// Gliding-hump family: WLLN holds, its conditional version fails
    #[command(alias = "A")]
    A(CounterAArgs),
    /// Family with vanishing Sigma but exploding scaled tails
    #[command(alias = "B")]
    B(CounterBArgs),
    /// Family with vanishing tails but exploding Sigma
    #[command(alias = "C")]
    C(CounterCArgs),
    /// Tail-oscillator law whose tau and sigma trade places along levels
    Oscillator(OscillatorArgs),
}

#[derive(Args)]
struct CounterAArgs {
    /// Number of levels
    #[arg(long)]
    m: u32,
    /// Dyadic depth (at least m)
    #[arg(long)]
    depth: u32,
    /// Comma-separated scale sequence N_alpha (2^(m+1) - 2 integers)
    #[arg(long = "n-alpha")]
    n_alpha: String,
    /// Minimum ratio between consecutive scales
    #[arg(long = "sep-factor", default_value = "10000")]
    sep_factor: String,
    /// Write the mixing-family JSON here
    #[arg(long = "family-out")]
    family_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CounterBArgs {
    /// Number of levels (desk scale is 3)
    #[arg(long)]
    m: u32,
    /// Allow levels past the desk scale
    #[arg(long)]
    force: bool,
    #[arg(long = "family-out")]
    family_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CounterCArgs {
    /// Number of levels (desk scale is 2)
    #[arg(long)]
    m: u32,
    /// Rational epsilon of the recursion p_j N_{j-1} = eps
    #[arg(long)]
    eps: String,
    /// Per-level mass budget
    #[arg(long)]
    delta: String,
    /// Optional explicit per-level scales N_{2^m} (comma-separated)
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    force: bool,
    #[arg(long = "family-out")]
    family_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OscillatorArgs {
    /// Comma-separated increasing level sequence N_k
    #[arg(long = "n-seq")]
    n_seq: String,
    /// Write the resulting distribution JSON here
    #[arg(long = "dist-out")]
    dist_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to a distribution JSON file (classical case)
    #[arg(long, conflicts_with = "family")]
    dist: Option<PathBuf>,
    /// Path to a mixing-family JSON file (exchangeable case)
    #[arg(long)]
    family: Option<PathBuf>,
    /// Experiment spec JSON ({"dist"|"family", "n", "eps", "reps", "seed"})
    #[arg(long, conflicts_with_all = ["dist", "family", "n_list", "seed"])]
    spec: Option<PathBuf>,
    /// Comma-separated sample sizes
    #[arg(long = "N")]
    n_list: Option<String>,
    #[arg(long, default_value = "1")]
    eps: String,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Root seed (required: every run must be reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Corrector: truncated mean delta_N, or zero
    #[arg(long, value_enum, default_value = "delta")]
    corrector: CorrectorArg,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectorArg {
    Delta,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsCheck {
    /// pi_N(eta) <= tau_N + sigma_N / eta^2
    Feller,
    /// P(|S_N| >= N) >= c * sigma_N for symmetric laws
    SymLower,
    /// pi_N >= pi^sym_N(2) / 2 plus the universal-constant ratios
    Symmetrization,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, value_enum, default_value = "feller")]
    check: BoundsCheck,
    #[arg(long = "N", required = true)]
    n_list: String,
    /// Eta values for the Feller bound (rationals)
    #[arg(long, default_value = "1")]
    eps: String,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::FAILURE;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Identities(args) => cmd_identities(args),
        Command::Classify(args) => cmd_classify(args),
        Command::ClassifyExch(args) => cmd_classify_exch(args),
        Command::Counterexample(cmd) => cmd_counterexample(cmd),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bounds(args) => cmd_bounds(args),
    }
}

// ---- input parsing -------------------------------------------------------

fn load_dist(path: &Path) -> Result<DiscreteDistribution> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading distribution file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_family(path: &Path) -> Result<MixingFamily> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading family file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_rat_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(|piece| parse_rational(piece).map_err(Into::into))
        .collect()
}

fn parse_positive_rat_list(s: &str, what: &str) -> Result<Vec<Rational>> {
    let list = parse_rat_list(s)?;
    if list
        .iter()
        .any(|x| x <= &Rational::from_integer(0.into()))
    {
        bail!("{what} values must be positive");
    }
    Ok(list)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<u64>()
                .with_context(|| format!("bad integer `{piece}`"))
        })
        .collect()
}

fn parse_bigint_list(s: &str) -> Result<Vec<BigInt>> {
    s.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<BigInt>()
                .map_err(|_| anyhow::anyhow!("bad integer `{piece}`"))
        })
        .collect()
}

/// Grid spec: `geo:t0:ratio:count` or a comma-separated rational list.
fn parse_grid(s: &str) -> Result<Vec<Rational>> {
    if let Some(rest) = s.strip_prefix("geo:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("geometric grid spec must be geo:t0:ratio:count");
        }
        let t0 = parse_rational(parts[0])?;
        let ratio = parse_rational(parts[1])?;
        let count: usize = parts[2].parse().context("bad grid count")?;
        if count == 0 {
            bail!("grid count must be positive");
        }
        if t0 <= Rational::from_integer(0.into()) || ratio <= Rational::from_integer(0.into()) {
            bail!("grid start and ratio must be positive");
        }
        Ok(geometric_grid(&t0, &ratio, count))
    } else {
        parse_positive_rat_list(s, "grid")
    }
}

fn emit(output: &OutputArgs, content: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print_stdout(content)?,
    }
    Ok(())
}

/// Write to stdout, treating a closed pipe (`lln-lab ... | head`) as a
/// normal early exit rather than an error.
fn print_stdout(content: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(content.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

// ---- subcommands ---------------------------------------------------------

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let d = load_dist(&args.dist)?;
    let eps_list = parse_positive_rat_list(&args.eps, "eps")?;
    let grid = parse_grid(&args.t_grid)?;
    let conv = args.tail.into();
    match args.output.format {
        Format::Csv => {
            let mut out = String::from("t,eps,delta,tau,sigma,v,rho\n");
            for eps in &eps_list {
                for t in &grid {
                    let p = feller_profile(&d, t, eps, conv);
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        format_rational(t),
                        format_rational(eps),
                        format_rational(&p.delta),
                        format_rational(&p.tau),
                        format_rational(&p.sigma),
                        format_rational(&p.v),
                        format_rational(&p.rho),
                    )?;
                }
            }
            emit(&args.output, &out)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = eps_list
                .iter()
                .flat_map(|eps| grid.iter().map(move |t| (t, eps)))
                .map(|(t, eps)| {
                    let p = feller_profile(&d, t, eps, conv);
                    serde_json::json!({
                        "t": format_rational(t),
                        "eps": format_rational(eps),
                        "delta": format_rational(&p.delta),
                        "tau": format_rational(&p.tau),
                        "sigma": format_rational(&p.sigma),
                        "v": format_rational(&p.v),
                        "rho": format_rational(&p.rho),
                    })
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows)?;
            text.push('\n');
            emit(&args.output, &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_identities(args: IdentitiesArgs) -> Result<ExitCode> {
    let d = load_dist(&args.dist)?;
    let m_list = parse_positive_rat_list(&args.m_list, "M")?;
    let eps_list = parse_positive_rat_list(&args.eps, "eps")?;
    let mut all_equal = true;
    let mut out = String::from("M,eps,tau,parts_rhs,parts_equal,inverse_rhs,inverse_equal\n");
    let mut json_rows = Vec::new();
    for eps in &eps_list {
        for m in &m_list {
            let parts = check_identity_parts(&d, m, eps, TailConvention::Strict);
            let inverse = check_identity_inverse(&d, m, eps, TailConvention::Strict);
            all_equal &= parts.equal && inverse.equal;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                format_rational(m),
                format_rational(eps),
                format_rational(&parts.lhs),
                format_rational(&parts.rhs),
                parts.equal,
                format_rational(&inverse.rhs),
                inverse.equal,
            )?;
            json_rows.push(serde_json::json!({
                "M": format_rational(m),
                "eps": format_rational(eps),
                "tau": format_rational(&parts.lhs),
                "parts_rhs": format_rational(&parts.rhs),
                "parts_equal": parts.equal,
                "inverse_rhs": format_rational(&inverse.rhs),
                "inverse_equal": inverse.equal,
            }));
        }
    }
    match args.output.format {
        Format::Csv => emit(&args.output, &out)?,
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&json_rows)?;
            text.push('\n');
            emit(&args.output, &text)?;
        }
    }
    Ok(if all_equal {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT_FAILED)
    })
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    let d = load_dist(&args.dist)?;
    let eps_list = parse_positive_rat_list(&args.eps, "eps")?;
    let grid = parse_grid(&args.t_grid)?;
    let threshold = parse_rational(&args.threshold)?;
    let report =
        classify_classical(&d, &eps_list, &grid, &threshold, args.window, args.tail.into())?;
    let text = match args.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut t = report.to_json_string();
            t.push('\n');
            t
        }
    };
    emit(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify_exch(args: ClassifyExchArgs) -> Result<ExitCode> {
    let family = load_family(&args.family)?;
    let eps_list = parse_positive_rat_list(&args.eps, "eps")?;
    let grid = parse_grid(&args.t_grid)?;
    let stat_threshold = parse_rational(&args.stat_threshold)?;
    let prob_threshold = parse_rational(&args.threshold)?;
    let report = classify_exchangeable(
        &family,
        &eps_list,
        &grid,
        &stat_threshold,
        &prob_threshold,
        args.window,
        args.tail.into(),
    )?;
    let text = match (args.output.format, args.long) {
        (Format::Csv, false) => report.to_csv(),
        (Format::Csv, true) => report.to_long_csv(),
        (Format::Json, _) => {
            let mut t = report.to_json_string();
            t.push('\n');
            t
        }
    };
    emit(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_counterexample(cmd: CounterexampleCmd) -> Result<ExitCode> {
    match cmd {
        CounterexampleCmd::A(args) => {
            let n_alpha = parse_bigint_list(&args.n_alpha)?;
            let sep: BigInt = args
                .sep_factor
                .parse()
                .map_err(|_| anyhow::anyhow!("bad separation factor"))?;
            let (params, family) = build_a(args.m, args.depth, &n_alpha, &sep)?;
            if let Some(path) = &args.family_out {
                write_json(path, &serde_json::to_value(&family)?)?;
            }
            let mut table = String::new();
            writeln!(table, "family A: {} levels, depth {}", args.m, args.depth)?;
            for (i, n) in params.n_alpha.iter().enumerate() {
                writeln!(table, "  k = {:>3}  N_alpha = {n}  alpha = 1/{n}", i + 3)?;
            }
            finish_params(&args.output, CounterexampleParams::A(params), table)?;
            Ok(ExitCode::SUCCESS)
        }
        CounterexampleCmd::B(args) => {
            if args.m > B_DESK_SCALE && !args.force {
                bail!(
                    "m = {} exceeds the desk scale {B_DESK_SCALE} for family B (use --force)",
                    args.m
                );
            }
            let (params, family) = build_b(args.m);
            let report = verify_b(&params);
            if let Some(path) = &args.family_out {
                write_json(path, &serde_json::to_value(&family)?)?;
            }
            let mut table = String::new();
            writeln!(table, "family B: {} levels", args.m)?;
            for level in &params.levels {
                writeln!(
                    table,
                    "  m = {}  p = {}  N = [{}]  guard = {}",
                    level.m,
                    format_rational(&level.p),
                    level
                        .ns
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(", "),
                    level.guard,
                )?;
            }
            writeln!(
                table,
                "verify: tau-at-head {}/{} exact, sigma violations {}, passed = {}",
                report.tau_checks.iter().filter(|c| c.ok).count(),
                report.tau_checks.len(),
                report.sigma_violations.len(),
                report.passed(),
            )?;
            let passed = report.passed();
            finish_params(&args.output, CounterexampleParams::B(params), table)?;
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT_FAILED)
            })
        }
        CounterexampleCmd::C(args) => {
            if args.m > C_DESK_SCALE && !args.force {
                bail!(
                    "m = {} exceeds the desk scale {C_DESK_SCALE} for family C (use --force)",
                    args.m
                );
            }
            let eps = parse_rational(&args.eps)?;
            let delta = parse_rational(&args.delta)?;
            let scales = match &args.scale {
                Some(s) => Some(parse_bigint_list(s)?),
                None => None,
            };
            let (params, family) = build_c(args.m, &eps, &delta, scales.as_deref())?;
            let report = verify_c(&params);
            if let Some(path) = &args.family_out {
                write_json(path, &serde_json::to_value(&family)?)?;
            }
            let mut table = String::new();
            writeln!(
                table,
                "family C: {} levels, eps = {}, delta = {}",
                args.m,
                format_rational(&eps),
                format_rational(&delta)
            )?;
            for level in &params.levels {
                writeln!(
                    table,
                    "  m = {}  N = [{}]  p = [{}]",
                    level.m,
                    level
                        .ns
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(", "),
                    level
                        .ps
                        .iter()
                        .map(format_rational)
                        .collect::<Vec<_>>()
                        .join(", "),
                )?;
            }
            writeln!(
                table,
                "verify: recursion violations {}+{}, mass_ok = {}, ordering_ok = {}, passed = {}",
                report.w2_violations.len(),
                report.w3_violations.len(),
                report.mass_ok,
                report.ordering_ok,
                report.passed(),
            )?;
            let passed = report.passed();
            finish_params(&args.output, CounterexampleParams::C(params), table)?;
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT_FAILED)
            })
        }
        CounterexampleCmd::Oscillator(args) => {
            let n_seq = parse_bigint_list(&args.n_seq)?;
            let d = build_oscillator(&n_seq)?;
            if let Some(path) = &args.dist_out {
                write_json(path, &serde_json::to_value(&d)?)?;
            }
            let mut table = String::new();
            writeln!(table, "tail oscillator: {} levels", n_seq.len())?;
            for (v, m) in d.atoms() {
                writeln!(
                    table,
                    "  value = {}  mass = {}",
                    format_rational(v),
                    format_rational(m)
                )?;
            }
            finish_params(
                &args.output,
                CounterexampleParams::Oscillator(OscillatorParams { n_seq }),
                table,
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Print the human-readable table to stdout; write the params JSON to --out
/// (or stdout when --format json and no --out was given).
fn finish_params(output: &OutputArgs, params: CounterexampleParams, table: String) -> Result<()> {
    print_stdout(&table)?;
    if let Some(path) = &output.out {
        write_json(path, &serde_json::to_value(&params)?)?;
    } else if output.format == Format::Json {
        let mut text = serde_json::to_string_pretty(&serde_json::to_value(&params)?)?;
        text.push('\n');
        print_stdout(&text)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ExperimentSpec {
    dist: Option<PathBuf>,
    family: Option<PathBuf>,
    n: Vec<u64>,
    eps: Vec<String>,
    reps: u64,
    seed: u64,
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let (dist_path, family_path, n_list, eps_list, reps, seed_root) = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading spec {}", path.display()))?;
            let spec: ExperimentSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let eps = spec
                .eps
                .iter()
                .map(|s| parse_rational(s).map_err(Into::into))
                .collect::<Result<Vec<_>>>()?;
            (spec.dist, spec.family, spec.n, eps, spec.reps, spec.seed)
        }
        None => {
            let n_list = parse_u64_list(
                args.n_list
                    .as_deref()
                    .context("--N is required (or use --spec)")?,
            )?;
            let seed = args.seed.context("--seed is required for simulate")?;
            (
                args.dist.clone(),
                args.family.clone(),
                n_list,
                parse_positive_rat_list(&args.eps, "eps")?,
                args.reps,
                seed,
            )
        }
    };
    if n_list.iter().any(|&n| n == 0) {
        bail!("sample sizes must be at least 1");
    }
    if reps < 100 {
        bail!("reps must be at least 100");
    }
    let seed = Seed::new(seed_root);
    let mut rows: Vec<SimulationRow> = Vec::new();
    match (dist_path, family_path) {
        (Some(path), None) => {
            let d = load_dist(&path)?;
            let mut experiment = 0u64;
            for n in &n_list {
                for eps in &eps_list {
                    let corrector = match args.corrector {
                        CorrectorArg::Delta => {
                            corrector_delta(&d, *n, &Rational::from_integer(1.into()))
                        }
                        CorrectorArg::Zero => Rational::from_integer(0.into()),
                    };
                    let est =
                        estimate_pi(&d, *n, eps, &corrector, reps, seed, experiment, args.threads);
                    rows.push(SimulationRow {
                        experiment: format!("pi[N={n},eps={}]", format_rational(eps)),
                        n: *n,
                        eps: eps.clone(),
                        estimate: est,
                        seed: seed_root,
                    });
                    experiment += 1;
                }
            }
        }
        (None, Some(path)) => {
            let family = load_family(&path)?;
            let stride = family.len() as u64 + 1;
            let mut cell = 0u64;
            for n in &n_list {
                for eps in &eps_list {
                    let report = estimate_pi_conditional(
                        &family,
                        *n,
                        eps,
                        reps,
                        seed,
                        cell * stride,
                        args.threads,
                    );
                    for (i, est) in report.components.iter().enumerate() {
                        rows.push(SimulationRow {
                            experiment: format!("Pi[N={n},eps={},comp={i}]", format_rational(eps)),
                            n: *n,
                            eps: eps.clone(),
                            estimate: *est,
                            seed: seed_root,
                        });
                    }
                    rows.push(SimulationRow {
                        experiment: format!("p[N={n},eps={}]", format_rational(eps)),
                        n: *n,
                        eps: eps.clone(),
                        estimate: report.aggregate,
                        seed: seed_root,
                    });
                    cell += 1;
                }
            }
        }
        _ => bail!("exactly one of --dist or --family is required"),
    }
    let text = match args.output.format {
        Format::Csv => simulation_csv(&rows),
        Format::Json => {
            let json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut v = estimate_json(&row.estimate);
                    let obj = v.as_object_mut().expect("object");
                    obj.insert("experiment".into(), row.experiment.clone().into());
                    obj.insert("N".into(), row.n.into());
                    obj.insert("eps".into(), format_rational(&row.eps).into());
                    obj.insert("seed".into(), row.seed.into());
                    v
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&json)?;
            text.push('\n');
            text
        }
    };
    emit(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode> {
    let d = load_dist(&args.dist)?;
    let n_list = parse_u64_list(&args.n_list)?;
    let eps_list = parse_positive_rat_list(&args.eps, "eta")?;
    if n_list.iter().any(|&n| n == 0) {
        bail!("sample sizes must be at least 1");
    }
    if args.reps < 100 {
        bail!("reps must be at least 100");
    }
    let seed = Seed::new(args.seed);
    let mut all_hold = true;
    let text = match args.check {
        BoundsCheck::Feller => {
            let mut out = format!("{SIMULATION_HEADER},rhs,holds\n");
            for n in &n_list {
                for eta in &eps_list {
                    let report = verify_feller_bound(&d, *n, eta, args.reps, seed, args.threads);
                    all_hold &= report.holds;
                    writeln!(
                        out,
                        "feller[N={n}],{n},{},{},{},{},{},{},{},{},{}",
                        format_rational(eta),
                        fmt_f64(report.empirical.value),
                        fmt_f64(report.empirical.stderr),
                        fmt_f64(report.empirical.ci_low),
                        fmt_f64(report.empirical.ci_high),
                        report.empirical.reps,
                        args.seed,
                        format_rational(&report.rhs),
                        report.holds,
                    )?;
                }
            }
            out
        }
        BoundsCheck::SymLower => {
            let mut out = format!("{SIMULATION_HEADER},sigma,ratio,ratio_ci_low,positive\n");
            for n in &n_list {
                let report = verify_symmetric_lower_bound(&d, *n, args.reps, seed, args.threads)?;
                all_hold &= report.positive;
                writeln!(
                    out,
                    "sym_lower[N={n}],{n},1,{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(report.empirical.value),
                    fmt_f64(report.empirical.stderr),
                    fmt_f64(report.empirical.ci_low),
                    fmt_f64(report.empirical.ci_high),
                    report.empirical.reps,
                    args.seed,
                    format_rational(&report.sigma),
                    fmt_f64(report.ratio),
                    fmt_f64(report.ratio_ci_low),
                    report.positive,
                )?;
            }
            out
        }
        BoundsCheck::Symmetrization => {
            let mut out =
                String::from("experiment,N,pi,pi_sym_2,holds_with_ci,upper_ratio,lower_ratio\n");
            for n in &n_list {
                let report = verify_symmetrization_pi(&d, *n, args.reps, seed, args.threads);
                all_hold &= report.holds_with_ci;
                writeln!(
                    out,
                    "symmetrization[N={n}],{n},{},{},{},{},{}",
                    fmt_f64(report.pi.value),
                    fmt_f64(report.pi_sym_2.value),
                    report.holds_with_ci,
                    report.upper_ratio.map(fmt_f64).unwrap_or_default(),
                    report.lower_ratio.map(fmt_f64).unwrap_or_default(),
                )?;
            }
            out
        }
    };
    emit(&args.output, &text)?;
    Ok(if all_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERDICT_FAILED)
    })
}

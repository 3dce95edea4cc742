//! Command-line front end for the `fountain` binary.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on runtime failures.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{encode_lt, encode_random_linear, EncodedSymbol, SourceBlock};
use crate::decode::{bp_decode, ge_decode, ge_square_replace, LinearSystem};
use crate::degree::{ideal_soliton, raptor_omega, robust_soliton, DegreePmf, NovelOmega, RobustSolitonParams, TailMode};
use crate::gf::FieldSpec;
use crate::sim::{self, DecodeMode, ExperimentConfig, SimError, DEFAULT_C, DEFAULT_DELTAS};

#[derive(Debug, Parser)]
#[command(name = "fountain", version, about = "Fountain codes over GF(q): simulator and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo failure rate vs. overhead
    Simulate(SimulateArgs),
    /// Closed-form random linear failure rates
    Analytic(AnalyticArgs),
    /// Degree distribution tools
    Dist {
        #[command(subcommand)]
        command: DistCommand,
    },
    /// Encode a random block, decode it, and report the outcome
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Flat `key = value` file; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated field orders
    #[arg(long)]
    q: Option<String>,
    /// Comma-separated from robust, raptor, novel, random-linear
    #[arg(long)]
    dist: Option<String>,
    /// Robust soliton constant c
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated robust soliton deltas
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    eps_step: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Use the quick preset of 1000 trials per point
    #[arg(long)]
    ci: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// square | rect
    #[arg(long)]
    mode: Option<String>,
    /// per-symbol | per-session
    #[arg(long)]
    tail_mode: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    /// Also write a gnuplot script here
    #[arg(long)]
    plot: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value = "2,4,8,16,32")]
    q: String,
    #[arg(long, default_value_t = 0.05)]
    eps_max: f64,
    #[arg(long, default_value_t = 0.01)]
    eps_step: f64,
    #[arg(long)]
    out: String,
}

#[derive(Debug, Subcommand)]
enum DistCommand {
    /// Print a degree PMF as `degree probability` lines
    Dump(DumpArgs),
}

#[derive(Debug, Args)]
struct DumpArgs {
    /// ideal | robust | raptor | novel
    #[arg(long)]
    name: String,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_DELTAS[0])]
    delta: f64,
    #[arg(long, default_value_t = 32)]
    q: u32,
    /// For novel: print one seeded realization instead of the per-symbol marginal
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: u32,
    /// ideal | robust | raptor | novel | random-linear
    #[arg(long)]
    dist: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// ge | bp | square
    #[arg(long, default_value = "ge")]
    decoder: String,
    #[arg(long, default_value_t = 1)]
    symbol_len: usize,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_DELTAS[0])]
    delta: f64,
    /// Write the received symbols, one per line, to this file
    #[arg(long)]
    symbols_out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Field(_) | SimError::Degree(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} value '{t}'"))))
        .collect()
}

/// Command-line value, else config-file value, else default.
fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw.parse().map_err(|_| CliError::Usage(format!("config key '{key}': bad value '{raw}'"))),
        None => Ok(default),
    }
}

fn pick_str(flag: Option<String>, file: &BTreeMap<String, String>, key: &str) -> Option<String> {
    flag.or_else(|| file.get(key).cloned())
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            sim::parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    const KNOWN: [&str; 15] = [
        "k", "q", "dist", "c", "delta", "eps-max", "eps-step", "trials", "ci", "seed", "mode", "tail-mode", "workers",
        "out", "plot",
    ];
    if let Some(key) = file.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(usage(format!("unknown config key '{key}'")));
    }

    let defaults = ExperimentConfig::default();
    let k = pick(args.k, &file, "k", defaults.k)?;
    let q_list = match pick_str(args.q, &file, "q") {
        Some(s) => parse_list::<u32>(&s, "q")?,
        None => defaults.q_list.clone(),
    };
    let c = pick(args.c, &file, "c", DEFAULT_C)?;
    let deltas = match pick_str(args.delta, &file, "delta") {
        Some(s) => parse_list::<f64>(&s, "delta")?,
        None => DEFAULT_DELTAS.to_vec(),
    };
    let distributions = match pick_str(args.dist, &file, "dist") {
        Some(s) => sim::parse_distributions(&s, c, &deltas)?,
        None => sim::parse_distributions("robust,raptor,novel", c, &deltas)?,
    };
    let eps_max = pick(args.eps_max, &file, "eps-max", 0.05)?;
    let eps_step = pick(args.eps_step, &file, "eps-step", 0.01)?;
    let ci = args.ci || pick(None, &file, "ci", false)?;
    let trials = pick(args.trials, &file, "trials", if ci { sim::CI_TRIALS } else { defaults.trials })?;
    let seed = pick(args.seed, &file, "seed", defaults.seed)?;
    let decode_mode = match pick_str(args.mode, &file, "mode") {
        Some(s) => s.parse::<DecodeMode>()?,
        None => defaults.decode_mode,
    };
    let tail_mode = match pick_str(args.tail_mode, &file, "tail-mode") {
        Some(s) => s.parse::<TailMode>().map_err(usage)?,
        None => defaults.tail_mode,
    };
    let workers = pick(args.workers, &file, "workers", 0)?;
    let out_path = pick_str(args.out, &file, "out").ok_or_else(|| usage("--out is required"))?;
    let plot_path = pick_str(args.plot, &file, "plot");

    let config = ExperimentConfig {
        k,
        q_list,
        distributions,
        epsilon_grid: sim::epsilon_grid(eps_max, eps_step)?,
        trials,
        seed,
        decode_mode,
        tail_mode,
    };
    config.validate()?;
    let rows = sim::run_experiment(&config, workers)?;
    sim::write_csv(&rows, out_path.as_ref())?;
    if let Some(plot) = plot_path {
        sim::emit_plot_script(&rows, &out_path, plot.as_ref())?;
    }
    writeln!(out, "wrote {} rows to {out_path}", rows.len()).map_err(runtime)?;
    Ok(())
}

fn analytic(args: AnalyticArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let q_list = parse_list::<u32>(&args.q, "q")?;
    if args.k < 1 {
        return Err(usage("--k must be at least 1"));
    }
    let grid = sim::epsilon_grid(args.eps_max, args.eps_step)?;
    let rows = sim::analytic_rows(args.k, &q_list, &grid)?;
    sim::write_csv(&rows, args.out.as_ref())?;
    writeln!(out, "wrote {} rows to {}", rows.len(), args.out).map_err(runtime)?;
    Ok(())
}

fn named_pmf(name: &str, k: usize, c: f64, delta: f64) -> Result<Option<DegreePmf>, CliError> {
    Ok(match name {
        "ideal" => Some(ideal_soliton(k).map_err(usage)?),
        "robust" => Some(robust_soliton(&RobustSolitonParams::new(k, c, delta).map_err(usage)?).map_err(usage)?),
        "raptor" => Some(raptor_omega(k).map_err(usage)?),
        "novel" | "random-linear" => None,
        other => return Err(usage(format!("unknown distribution '{other}'"))),
    })
}

fn dump(args: DumpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pmf = match named_pmf(&args.name, args.k, args.c, args.delta)? {
        Some(pmf) => pmf,
        None if args.name == "novel" => {
            let omega = NovelOmega::new(args.k, args.q, TailMode::PerSession).map_err(usage)?;
            match args.seed {
                Some(seed) => omega.realize_pmf(&mut ChaCha8Rng::seed_from_u64(seed)),
                None => omega.marginal_pmf(),
            }
        }
        None => return Err(usage(format!("'{}' has no degree distribution", args.name))),
    };
    for &(d, p) in pmf.entries() {
        writeln!(out, "{d} {p:.9}").map_err(runtime)?;
    }
    Ok(())
}

fn roundtrip(args: RoundtripArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.k < 1 || args.symbol_len < 1 {
        return Err(usage("--k and --symbol-len must be at least 1"));
    }
    let field = FieldSpec::new(args.q).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut protocol_rng = ChaCha8Rng::seed_from_u64(args.seed);
    protocol_rng.set_stream(1);

    let fixed = named_pmf(&args.dist, args.k, args.c, args.delta)?;
    let novel = match args.dist.as_str() {
        "novel" => Some(NovelOmega::new(args.k, args.q, TailMode::PerSymbol).map_err(usage)?),
        _ => None,
    };
    let block = SourceBlock::random(&field, args.k, args.symbol_len, &mut rng);
    let symbols: Vec<EncodedSymbol> = (0..args.n)
        .map(|_| match (&fixed, &novel) {
            (Some(pmf), _) => encode_lt(&block, pmf, &field, &mut rng),
            (None, Some(omega)) => encode_lt(&block, omega, &field, &mut rng),
            (None, None) => encode_random_linear(&block, &field, &mut rng),
        })
        .collect();

    if let Some(path) = &args.symbols_out {
        let text: String = symbols.iter().map(|s| s.to_line() + "\n").collect();
        std::fs::write(path, text).map_err(runtime)?;
    }

    let report = match args.decoder.as_str() {
        "ge" => ge_decode(&LinearSystem::from_symbols(&symbols, args.k, &field).map_err(runtime)?),
        "bp" => bp_decode(&symbols, args.k, &field),
        "square" => {
            if args.n < args.k {
                return Err(usage("square decoder needs --n >= --k"));
            }
            ge_square_replace(symbols, args.k, &field, args.n, &mut protocol_rng)
        }
        other => return Err(usage(format!("unknown decoder '{other}'"))),
    }
    .map_err(runtime)?;

    let diff = match &report.recovered {
        Some(rec) => rec.iter().zip(block.symbols()).filter(|(a, b)| a != b).count(),
        None => args.k,
    };
    writeln!(out, "status: {}", report.status).map_err(runtime)?;
    writeln!(out, "resolved: {}/{}", report.resolved_count, args.k).map_err(runtime)?;
    writeln!(out, "symbol_diff: {diff}").map_err(runtime)?;
    Ok(())
}

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Analytic(a) => analytic(a, out),
        Command::Dist { command: DistCommand::Dump(a) } => dump(a, out),
        Command::Roundtrip(a) => roundtrip(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

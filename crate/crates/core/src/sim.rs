//! Monte Carlo harness: decoding failure rate versus overhead for each
//! (degree distribution, field) pair.
//!
//! Every trial draws its randomness from a generator seeded by a pure
//! function of `(master seed, distribution, q, n, trial index)`, and failures
//! are aggregated as integer sums, so results do not depend on how trials are
//! spread over worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{self, AnalyticError};
use crate::codec::{encode_lt, encode_random_linear, EncodedSymbol, SourceBlock};
use crate::decode::{ge_decode, ge_square_replace, DecodeError, LinearSystem};
use crate::degree::{raptor_omega, robust_soliton, DegreeError, DegreePmf, NovelOmega, RobustSolitonParams, TailMode};
use crate::gf::{FieldError, FieldSpec};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("decoded block differs from source in {mismatches} symbols ({label}, q={q}, n={n}, trial {trial})")]
    Integrity { label: String, q: u32, n: usize, trial: u64, mismatches: usize },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Degree law (or dense coding) used to build encoded symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    RobustSoliton { c: f64, delta: f64 },
    Raptor,
    Novel,
    RandomLinear,
}

impl Distribution {
    /// Stable label used in CSV output and in trial seed derivation.
    pub fn label(&self) -> String {
        match self {
            Distribution::RobustSoliton { c, delta } => format!("robust-soliton:c={c}:delta={delta}"),
            Distribution::Raptor => "raptor".into(),
            Distribution::Novel => "novel".into(),
            Distribution::RandomLinear => "random-linear".into(),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    /// Keep a `K x K` matrix; each extra symbol overwrites a random row.
    #[default]
    SquareReplace,
    /// Decode all `n` received rows.
    Rectangular,
}

impl DecodeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::SquareReplace => "square-replace",
            DecodeMode::Rectangular => "rectangular",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecodeMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" | "square-replace" => Ok(DecodeMode::SquareReplace),
            "rect" | "rectangular" => Ok(DecodeMode::Rectangular),
            other => Err(SimError::Config(format!("unknown decode mode '{other}'"))),
        }
    }
}

/// Default robust soliton tuning constant.
pub const DEFAULT_C: f64 = 0.05;
pub const DEFAULT_DELTAS: [f64; 2] = [0.01, 0.001];
/// Trial count for quick runs.
pub const CI_TRIALS: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub q_list: Vec<u32>,
    pub distributions: Vec<Distribution>,
    pub epsilon_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub decode_mode: DecodeMode,
    pub tail_mode: TailMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 100,
            q_list: vec![4, 8, 16, 32],
            distributions: default_distributions(),
            epsilon_grid: epsilon_grid(0.05, 0.01).expect("valid default grid"),
            trials: 10_000,
            seed: 1,
            decode_mode: DecodeMode::SquareReplace,
            tail_mode: TailMode::PerSymbol,
        }
    }
}

/// Both robust soliton variants, Raptor, and the random-tail distribution.
pub fn default_distributions() -> Vec<Distribution> {
    let mut out: Vec<Distribution> =
        DEFAULT_DELTAS.iter().map(|&delta| Distribution::RobustSoliton { c: DEFAULT_C, delta }).collect();
    out.push(Distribution::Raptor);
    out.push(Distribution::Novel);
    out
}

/// `0, step, 2 step, ..., max` (max included when it lies on the grid).
pub fn epsilon_grid(max: f64, step: f64) -> Result<Vec<f64>, SimError> {
    if !(max >= 0.0) || !max.is_finite() {
        return Err(SimError::Config(format!("eps-max {max} must be a nonnegative number")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(SimError::Config(format!("eps-step {step} must be positive")));
    }
    let count = (max / step + 1e-9).floor() as usize;
    // round away binary noise such as 0.30000000000000004
    Ok((0..=count).map(|i| ((i as f64 * step) * 1e12).round() / 1e12).collect())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials < 1 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(SimError::Config("K must be at least 1".into()));
        }
        if self.q_list.is_empty() || self.distributions.is_empty() || self.epsilon_grid.is_empty() {
            return Err(SimError::Config("q list, distribution list and epsilon grid must be nonempty".into()));
        }
        if let Some(eps) = self.epsilon_grid.iter().find(|&&e| !(e >= 0.0) || !e.is_finite()) {
            return Err(SimError::Config(format!("overhead {eps} must be nonnegative")));
        }
        for &q in &self.q_list {
            FieldSpec::new(q)?;
            for dist in &self.distributions {
                DegreeLaw::build(*dist, self.k, q, self.tail_mode)?;
            }
        }
        Ok(())
    }

    /// `(epsilon, n)` for every grid point.
    pub fn received_counts(&self) -> Result<Vec<(f64, usize)>, SimError> {
        self.epsilon_grid
            .iter()
            .map(|&eps| Ok((eps, analytic::received_count(self.k, eps)?)))
            .collect()
    }
}

#[derive(Debug, Clone)]
enum DegreeLaw {
    Fixed(DegreePmf),
    Novel(NovelOmega),
    Dense,
}

impl DegreeLaw {
    fn build(dist: Distribution, k: usize, q: u32, tail_mode: TailMode) -> Result<DegreeLaw, SimError> {
        Ok(match dist {
            Distribution::RobustSoliton { c, delta } => {
                DegreeLaw::Fixed(robust_soliton(&RobustSolitonParams::new(k, c, delta)?)?)
            }
            Distribution::Raptor => DegreeLaw::Fixed(raptor_omega(k)?),
            Distribution::Novel => DegreeLaw::Novel(NovelOmega::new(k, q, tail_mode)?),
            Distribution::RandomLinear => DegreeLaw::Dense,
        })
    }
}

/// One grid point of an experiment, with the field and degree law prebuilt.
#[derive(Debug, Clone)]
pub struct TrialSlice {
    pub distribution: Distribution,
    pub k: usize,
    pub n: usize,
    pub decode_mode: DecodeMode,
    pub tail_mode: TailMode,
    field: FieldSpec,
    law: DegreeLaw,
    label: String,
}

impl TrialSlice {
    pub fn new(
        distribution: Distribution,
        k: usize,
        q: u32,
        n: usize,
        decode_mode: DecodeMode,
        tail_mode: TailMode,
    ) -> Result<TrialSlice, SimError> {
        let field = FieldSpec::new(q)?;
        let law = DegreeLaw::build(distribution, k, q, tail_mode)?;
        Ok(TrialSlice { distribution, k, n, decode_mode, tail_mode, field, law, label: distribution.label() })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialVerdict {
    Decoded,
    Failed,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Seed for one trial, a pure function of its coordinates.
pub fn trial_seed(master_seed: u64, label: &str, q: u32, n: usize, trial_index: u64) -> u64 {
    [fnv1a(label.as_bytes()), q as u64, n as u64, trial_index]
        .iter()
        .fold(splitmix64(master_seed), |acc, &word| splitmix64(acc ^ word))
}

/// Run one trial: random source block, `n` encoded symbols, GE decode under
/// the slice's decode mode. A successful decode must reproduce the source
/// block exactly, otherwise an integrity error is returned.
pub fn run_trial(slice: &TrialSlice, trial_index: u64, master_seed: u64) -> Result<TrialVerdict, SimError> {
    let seed = trial_seed(master_seed, &slice.label, slice.q(), slice.n, trial_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut protocol_rng = ChaCha8Rng::seed_from_u64(seed);
    protocol_rng.set_stream(1);

    let field = &slice.field;
    let k = slice.k;
    let block = SourceBlock::random(field, k, 1, &mut rng);

    let session_pmf = match (&slice.law, slice.tail_mode) {
        (DegreeLaw::Novel(omega), TailMode::PerSession) => Some(omega.realize_pmf(&mut rng)),
        _ => None,
    };
    let mut next_symbol = || -> EncodedSymbol {
        match (&slice.law, &session_pmf) {
            (DegreeLaw::Dense, _) => encode_random_linear(&block, field, &mut rng),
            (_, Some(pmf)) => encode_lt(&block, pmf, field, &mut rng),
            (DegreeLaw::Fixed(pmf), None) => encode_lt(&block, pmf, field, &mut rng),
            (DegreeLaw::Novel(omega), None) => encode_lt(&block, omega, field, &mut rng),
        }
    };

    let report = match slice.decode_mode {
        DecodeMode::SquareReplace => {
            let stream = std::iter::repeat_with(&mut next_symbol).take(slice.n);
            ge_square_replace(stream, k, field, slice.n, &mut protocol_rng)?
        }
        DecodeMode::Rectangular => {
            let symbols: Vec<EncodedSymbol> = std::iter::repeat_with(&mut next_symbol).take(slice.n).collect();
            ge_decode(&LinearSystem::from_symbols(&symbols, k, field)?)?
        }
    };

    match report.recovered {
        Some(recovered) => {
            let mismatches = recovered.iter().zip(block.symbols()).filter(|(a, b)| a != b).count();
            if mismatches > 0 {
                return Err(SimError::Integrity {
                    label: slice.label.clone(),
                    q: slice.q(),
                    n: slice.n,
                    trial: trial_index,
                    mismatches,
                });
            }
            Ok(TrialVerdict::Decoded)
        }
        None => Ok(TrialVerdict::Failed),
    }
}

/// One aggregated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub distribution: String,
    pub q: u32,
    pub k: usize,
    pub epsilon: f64,
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub std_err: f64,
    pub decode_mode: String,
    pub seed: u64,
    /// Empty unless the distribution has a random tail.
    pub tail_mode: String,
}

impl ResultRow {
    pub fn from_counts(slice: &TrialSlice, epsilon: f64, trials: u64, failures: u64, seed: u64) -> ResultRow {
        let p = failures as f64 / trials as f64;
        ResultRow {
            distribution: slice.label.clone(),
            q: slice.q(),
            k: slice.k,
            epsilon,
            n: slice.n,
            trials,
            failures,
            failure_rate: p,
            std_err: (p * (1.0 - p) / trials as f64).sqrt(),
            decode_mode: slice.decode_mode.to_string(),
            seed,
            tail_mode: match slice.distribution {
                Distribution::Novel => slice.tail_mode.to_string(),
                _ => String::new(),
            },
        }
    }
}

/// Count failures of one slice over `trials` trials.
pub fn count_failures(slice: &TrialSlice, trials: u64, master_seed: u64) -> Result<u64, SimError> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(slice, t, master_seed).map(|v| (v == TrialVerdict::Failed) as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Run the full (distribution x q x epsilon) grid on `workers` threads
/// (0 = rayon default). Row order is fixed by the config.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>, SimError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let points = config.received_counts()?;
    let mut rows = Vec::with_capacity(config.distributions.len() * config.q_list.len() * points.len());
    for &dist in &config.distributions {
        for &q in &config.q_list {
            for &(eps, n) in &points {
                let slice = TrialSlice::new(dist, config.k, q, n, config.decode_mode, config.tail_mode)?;
                let failures = pool.install(|| count_failures(&slice, config.trials, config.seed))?;
                rows.push(ResultRow::from_counts(&slice, eps, config.trials, failures, config.seed));
            }
        }
    }
    Ok(rows)
}

/// Closed-form random-linear rows in the simulator's CSV schema.
pub fn analytic_rows(k: usize, q_list: &[u32], epsilon_grid: &[f64]) -> Result<Vec<ResultRow>, SimError> {
    let mut rows = Vec::new();
    for &q in q_list {
        FieldSpec::new(q)?;
        for (eps, n, f) in analytic::failure_curve(k, q, epsilon_grid)? {
            rows.push(ResultRow {
                distribution: "random-linear-analytic".into(),
                q,
                k,
                epsilon: eps,
                n,
                trials: 0,
                failures: 0,
                failure_rate: f,
                std_err: 0.0,
                decode_mode: "closed-form".into(),
                seed: 0,
                tail_mode: String::new(),
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "distribution,q,k,epsilon,n,trials,failures,failure_rate,std_err,decode_mode,seed,tail_mode";

/// `x` with 6 significant digits, `%g` style: fixed notation for exponents
/// in `-4..6`, scientific otherwise, trailing zeros removed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_line(row: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        row.distribution,
        row.q,
        row.k,
        format_sig6(row.epsilon),
        row.n,
        row.trials,
        row.failures,
        format_sig6(row.failure_rate),
        format_sig6(row.std_err),
        row.decode_mode,
        row.seed,
        row.tail_mode
    )
}

pub fn write_csv_to<W: Write>(rows: &[ResultRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_line(row))?;
    }
    out.flush()
}

pub fn write_csv(rows: &[ResultRow], destination: &Path) -> Result<(), SimError> {
    let file = File::create(destination)?;
    write_csv_to(rows, BufWriter::new(file))?;
    Ok(())
}

pub fn parse_csv<R: BufRead>(input: R) -> Result<Vec<ResultRow>, SimError> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| SimError::Csv("missing header".into()))??;
    if header != CSV_HEADER {
        return Err(SimError::Csv(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(SimError::Csv(format!("line {}: expected 12 fields, got {}", i + 2, f.len())));
        }
        let bad = |what: &str| SimError::Csv(format!("line {}: bad {what}", i + 2));
        rows.push(ResultRow {
            distribution: f[0].to_string(),
            q: f[1].parse().map_err(|_| bad("q"))?,
            k: f[2].parse().map_err(|_| bad("k"))?,
            epsilon: f[3].parse().map_err(|_| bad("epsilon"))?,
            n: f[4].parse().map_err(|_| bad("n"))?,
            trials: f[5].parse().map_err(|_| bad("trials"))?,
            failures: f[6].parse().map_err(|_| bad("failures"))?,
            failure_rate: f[7].parse().map_err(|_| bad("failure_rate"))?,
            std_err: f[8].parse().map_err(|_| bad("std_err"))?,
            decode_mode: f[9].to_string(),
            seed: f[10].parse().map_err(|_| bad("seed"))?,
            tail_mode: f[11].to_string(),
        });
    }
    Ok(rows)
}

fn marker_for(label: &str, robust_seen: usize) -> (u32, &'static str) {
    // gnuplot point types: 8 triangle, 10 inverted triangle, 6 circle, 3 star
    if label.starts_with("robust-soliton") {
        if robust_seen == 0 {
            (8, "triangle")
        } else {
            (10, "inverted triangle")
        }
    } else if label == "raptor" {
        (6, "circle")
    } else if label == "novel" {
        (3, "star")
    } else {
        (1, "plus")
    }
}

/// Gnuplot script plotting failure rate against overhead, one panel per q,
/// one series per distribution, log-scale y. `csv_path` is embedded as given.
pub fn plot_script(rows: &[ResultRow], csv_path: &str) -> Result<String, SimError> {
    if rows.is_empty() {
        return Err(SimError::Config("no rows to plot".into()));
    }
    let mut q_values: Vec<u32> = rows.iter().map(|r| r.q).collect();
    q_values.sort_unstable();
    q_values.dedup();
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.distribution.as_str()) {
            labels.push(&r.distribution);
        }
    }
    let panels = q_values.len();
    let cols = if panels > 1 { 2 } else { 1 };
    let grid_rows = panels.div_ceil(cols);
    let escaped = csv_path.replace('\\', "\\\\").replace('"', "\\\"");

    let mut s = String::new();
    s.push_str("# failure rate vs overhead\n");
    s.push_str(&format!("datafile = \"{escaped}\"\n"));
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale y\n");
    s.push_str("set format y '10^{%L}'\n");
    s.push_str("set xlabel 'overhead epsilon'\n");
    s.push_str("set ylabel 'failure rate F'\n");
    s.push_str("set grid\n");
    s.push_str(&format!("set multiplot layout {grid_rows},{cols}\n"));
    for q in &q_values {
        s.push_str(&format!("set title 'q = {q}'\n"));
        let mut series = Vec::new();
        let mut robust_seen = 0;
        for label in &labels {
            let (pt, _) = marker_for(label, robust_seen);
            if label.starts_with("robust-soliton") {
                robust_seen += 1;
            }
            series.push(format!(
                "datafile skip 1 using (strcol(1) eq '{label}' && $2 == {q} ? $4 : 1/0):8 with linespoints pt {pt} title '{label}'"
            ));
        }
        s.push_str("plot ");
        s.push_str(&series.join(", \\\n     "));
        s.push('\n');
    }
    s.push_str("unset multiplot\n");
    Ok(s)
}

pub fn emit_plot_script(rows: &[ResultRow], csv_path: &str, destination: &Path) -> Result<(), SimError> {
    let script = plot_script(rows, csv_path)?;
    std::fs::write(destination, script)?;
    Ok(())
}

/// Parse flat `key = value` text. `#` starts a comment; blank lines are
/// ignored; later keys override earlier ones.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, SimError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Parse a comma-separated list of distribution names. `robust` expands to
/// one entry per delta.
pub fn parse_distributions(list: &str, c: f64, deltas: &[f64]) -> Result<Vec<Distribution>, SimError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name {
            "robust" | "robust-soliton" => {
                out.extend(deltas.iter().map(|&delta| Distribution::RobustSoliton { c, delta }));
            }
            "raptor" => out.push(Distribution::Raptor),
            "novel" => out.push(Distribution::Novel),
            "random-linear" | "rlf" => out.push(Distribution::RandomLinear),
            other => return Err(SimError::Config(format!("unknown distribution '{other}'"))),
        }
    }
    if out.is_empty() {
        return Err(SimError::Config("empty distribution list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.05), "0.05");
        assert_eq!(format_sig6(0.123456789), "0.123457");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(0.000012345678), "1.23457e-5");
        assert_eq!(format_sig6(0.0001), "0.0001");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.030000000000000027), "0.03");
    }

    #[test]
    fn grid_construction() {
        assert_eq!(epsilon_grid(0.05, 0.01).unwrap(), vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.05]);
        assert_eq!(epsilon_grid(0.0, 0.01).unwrap(), vec![0.0]);
        assert!(epsilon_grid(-0.1, 0.01).is_err());
        assert!(epsilon_grid(0.1, 0.0).is_err());
    }

    #[test]
    fn default_config_grid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.distributions.len() * c.q_list.len() * c.epsilon_grid.len(), 96);
        let ns: Vec<usize> = c.received_counts().unwrap().iter().map(|p| p.1).collect();
        assert_eq!(ns, vec![100, 101, 102, 103, 104, 105]);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig { trials: 0, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        c.trials = 1;
        c.q_list = vec![6];
        assert!(matches!(c.validate(), Err(SimError::Field(_))));
        c.q_list = vec![2];
        assert!(matches!(c.validate(), Err(SimError::Degree(DegreeError::FieldTooSmall(2)))));
        c.distributions = vec![Distribution::Raptor];
        c.k = 50;
        assert!(c.validate().is_err());
        c.k = 100;
        c.epsilon_grid = vec![-0.01];
        assert!(c.validate().is_err());
    }

    #[test]
    fn trial_determinism() {
        let slice = TrialSlice::new(Distribution::Novel, 100, 16, 102, DecodeMode::SquareReplace, TailMode::PerSymbol).unwrap();
        for t in 0..20 {
            assert_eq!(run_trial(&slice, t, 99).unwrap(), run_trial(&slice, t, 99).unwrap());
        }
        assert_ne!(trial_seed(1, "raptor", 4, 100, 0), trial_seed(1, "raptor", 4, 100, 1));
        assert_ne!(trial_seed(1, "raptor", 4, 100, 0), trial_seed(1, "novel", 4, 100, 0));
        assert_ne!(trial_seed(1, "raptor", 4, 100, 0), trial_seed(2, "raptor", 4, 100, 0));
    }

    #[test]
    fn single_trial_rows() {
        let config = ExperimentConfig {
            k: 20,
            q_list: vec![4],
            distributions: vec![Distribution::RandomLinear],
            epsilon_grid: vec![0.0, 0.1],
            trials: 1,
            ..ExperimentConfig::default()
        };
        let rows = run_experiment(&config, 1).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert!(r.failure_rate == 0.0 || r.failure_rate == 1.0);
            assert_eq!(r.std_err, 0.0);
            assert_eq!(r.tail_mode, "");
        }
    }

    #[test]
    fn huge_overhead_robust_soliton_rarely_fails() {
        let slice = TrialSlice::new(
            Distribution::RobustSoliton { c: 0.05, delta: 0.01 },
            100,
            4,
            400,
            DecodeMode::Rectangular,
            TailMode::PerSymbol,
        )
        .unwrap();
        let failures = count_failures(&slice, 1000, 5).unwrap();
        assert!(failures < 1, "{failures} failures");
    }

    #[test]
    fn csv_roundtrip() {
        let mut buf = Vec::new();
        write_csv_to(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));

        let slice = TrialSlice::new(Distribution::Novel, 100, 8, 103, DecodeMode::SquareReplace, TailMode::PerSession).unwrap();
        let row = ResultRow::from_counts(&slice, 0.03, 3, 1, 42);
        let mut first = Vec::new();
        write_csv_to(std::slice::from_ref(&row), &mut first).unwrap();
        let parsed = parse_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_csv_to(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(parsed[0].tail_mode, "per-session");
        assert_eq!(parsed[0].failures, 1);
    }

    #[test]
    fn plot_script_panels() {
        let rows = analytic_rows(100, &[4, 8, 16, 32], &[0.0, 0.01]).unwrap();
        let script = plot_script(&rows, "out/results.csv").unwrap();
        assert_eq!(script.matches("set title").count(), 4);
        assert!(script.contains("set logscale y"));
        assert!(script.contains("\"out/results.csv\""));
        let single = analytic_rows(100, &[16], &[0.0]).unwrap();
        assert_eq!(plot_script(&single, "r.csv").unwrap().matches("set title").count(), 1);
        assert!(plot_script(&[], "r.csv").is_err());
    }

    #[test]
    fn plot_markers() {
        let rows: Vec<ResultRow> = default_distributions()
            .iter()
            .map(|d| {
                let slice = TrialSlice::new(*d, 100, 8, 100, DecodeMode::SquareReplace, TailMode::PerSymbol).unwrap();
                ResultRow::from_counts(&slice, 0.0, 1, 0, 1)
            })
            .collect();
        let script = plot_script(&rows, "x.csv").unwrap();
        assert!(script.contains("pt 8 title 'robust-soliton:c=0.05:delta=0.01'"));
        assert!(script.contains("pt 10 title 'robust-soliton:c=0.05:delta=0.001'"));
        assert!(script.contains("pt 6 title 'raptor'"));
        assert!(script.contains("pt 3 title 'novel'"));
    }

    #[test]
    fn config_text() {
        let map = parse_config_text("# experiment\nk = 50\n q=4,8 # fields\n\ntrials = 10\n").unwrap();
        assert_eq!(map["k"], "50");
        assert_eq!(map["q"], "4,8");
        assert_eq!(map["trials"], "10");
        assert!(parse_config_text("k 50").is_err());
    }

    #[test]
    fn distribution_lists() {
        let d = parse_distributions("robust,raptor,novel", 0.05, &[0.01, 0.001]).unwrap();
        assert_eq!(d, default_distributions());
        assert!(parse_distributions("lt", 0.05, &[0.01]).is_err());
        assert!(parse_distributions("", 0.05, &[0.01]).is_err());
        assert_eq!(parse_distributions("random-linear", 0.05, &[]).unwrap(), vec![Distribution::RandomLinear]);
    }
}

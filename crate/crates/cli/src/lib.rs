//! `sedvlf`: channel constants, bounds, Monte Carlo sessions and sweeps for
//! the SED encoder over binary asymmetric channels.
//!
//! Exit codes: 0 success, 2 usage error, 3 domain error, 4 anomaly (step cap
//! exceeded or an internal consistency check failed), 1 I/O failure.

pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sed_vlf::bounds::bound_set;
use sed_vlf::first_passage::{delta_recursion, mc_first_passage, node_solve, v0_closed_form};
use sed_vlf::session_sim::{monte_carlo, sweep, with_workers, MAX_K};
use sed_vlf::{Algorithm, BoundSet, ChannelSpec, Error, FirstPassageProblem, SessionConfig, SimSummary};
use thiserror::Error as ThisError;

use table::{Cell, Format, Table};

pub const SWEEP_HEADER: [&str; 15] = [
    "k", "M", "epsilon", "trials", "avg_tau", "tau_stderr", "rate", "pe_hat", "pe_ci_hi", "bound_thm1",
    "bound_cor1", "bound_thm3", "bound_thm6", "converse", "runtime_s",
];

/// Worker-count override read by [`run`].
pub const THREADS_ENV: &str = "SED_THREADS";

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Domain(_) | Error::ZeroCapacity { .. } | Error::Precondition(_)) => 3,
            CliError::Core(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sedvlf", version, about = "SED-encoder VLF coding over binary asymmetric channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity, C1, C2 and the capacity-achieving input law.
    Stats {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Achievability and converse bounds on the average blocklength.
    Bounds {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo sessions with the SED encoder.
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Simulation joined with every bound, one row per k.
    Sweep {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Expected first-passage time of the confirmation chain three ways.
    Firstpassage {
        /// Forward states; derived from --epsilon when omitted.
        #[arg(long)]
        n: Option<u32>,
        /// Backward (crossover) probability.
        #[arg(long)]
        p: f64,
        /// Self-loop weight; defaults to the bound derived for a BSC(p) session.
        #[arg(long)]
        delta0: Option<f64>,
        /// Target error probability, used when --n is omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// P(Y=1 | X=0).
    #[arg(long)]
    p0: f64,
    /// P(Y=0 | X=1); defaults to --p0 (a BSC).
    #[arg(long)]
    p1: Option<f64>,
}

impl ChannelArgs {
    fn spec(&self) -> Result<ChannelSpec, CliError> {
        let p1 = self.p1.unwrap_or(self.p0);
        let spec = ChannelSpec::new(self.p0, p1)?;
        spec.stats()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Message bits: a single value or an inclusive range such as 1..12.
    #[arg(long, value_parser = parse_k)]
    k: RangeInclusive<u32>,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Greedy)]
    algorithm: AlgorithmArg,
    /// Fill the runtime_s column (otherwise left empty so reruns are byte-identical).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Greedy,
    Original,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Greedy => Algorithm::Greedy,
            AlgorithmArg::Original => Algorithm::Original,
        }
    }
}

fn parse_k(s: &str) -> Result<RangeInclusive<u32>, String> {
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad k `{t}`: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let k = parse(s)?;
            (k, k)
        }
    };
    if lo < 1 || hi > MAX_K || lo > hi {
        return Err(format!("k range {lo}..{hi} must lie within 1..{MAX_K} and be nonempty"));
    }
    Ok(lo..=hi)
}

/// Parse `args` (program name first), run the command and return the exit
/// code. Reads the worker count from `SED_THREADS` when set.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let workers = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => {
                let _ = writeln!(err, "error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return 2;
            }
        },
        Err(_) => None,
    };
    run_with_workers(args, workers, out, err)
}

/// As [`run`], with an explicit worker count (`None`: the global pool).
pub fn run_with_workers<I, T>(args: I, workers: Option<usize>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let mut log = Vec::new();
    let result = match workers {
        Some(n) => with_workers(n, || dispatch(cli.command, &mut log)),
        None => dispatch(cli.command, &mut log),
    };
    let _ = err.write_all(&log);
    // a failed sweep row still writes the partial table before reporting
    let result = result.and_then(|r| {
        emit(&r.text, r.path.as_ref(), out)?;
        r.failure.map_or(Ok(()), |e| Err(e.into()))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check_trials(trials: u64, min: u64) -> Result<(), CliError> {
    if trials < min {
        return Err(CliError::Usage(format!("--trials must be at least {min}")));
    }
    Ok(())
}

fn configs(spec: ChannelSpec, point: &PointArgs, alg: Algorithm) -> Result<Vec<SessionConfig>, CliError> {
    point
        .k
        .clone()
        .map(|k| SessionConfig::new(spec, k, point.epsilon, alg).map_err(CliError::from))
        .collect()
}

struct Rendered {
    text: String,
    path: Option<PathBuf>,
    failure: Option<Error>,
}

impl Rendered {
    fn ok(table: Table, out: OutputArgs) -> Self {
        Rendered { text: table.render(out.format), path: out.output, failure: None }
    }
}

fn dispatch(cmd: Command, err: &mut Vec<u8>) -> Result<Rendered, CliError> {
    match cmd {
        Command::Stats { channel, out } => Ok(Rendered::ok(stats_table(&channel.spec()?)?, out)),
        Command::Bounds { channel, point, out } => {
            let spec = channel.spec()?;
            let mut t = Table::new(&[
                "k", "M", "epsilon", "bound_thm1", "bound_cor1", "bound_thm3", "bound_thm6", "converse",
                "converse_sup", "converse_weak",
            ]);
            for k in point.k.clone() {
                let m = 1u64 << k;
                let b = bound_set(m, point.epsilon, &spec)?;
                t.push(vec![
                    Cell::Int(k as u64),
                    Cell::Int(m),
                    Cell::Num(point.epsilon),
                    Cell::Num(b.thm1),
                    Cell::Num(b.cor1),
                    Cell::Num(b.thm3_bac),
                    b.thm6_bsc.map_or(Cell::Empty, Cell::Num),
                    Cell::Num(b.converse_vlf),
                    Cell::Num(b.converse_sup),
                    Cell::Num(b.converse_weak),
                ]);
            }
            Ok(Rendered::ok(t, out))
        }
        Command::Simulate { channel, point, mc, out } => {
            check_trials(mc.trials, 1)?;
            let cfgs = configs(channel.spec()?, &point, mc.algorithm.into())?;
            let mut t = Table::new(&[
                "k", "M", "epsilon", "trials", "errors", "avg_tau", "tau_stderr", "rate", "pe_hat", "pe_ci_lo",
                "pe_ci_hi", "avg_nu", "nu_stderr", "avg_confirm", "confirm_stderr", "avg_fallbacks", "runtime_s",
            ]);
            for cfg in &cfgs {
                let start = Instant::now();
                let s = monte_carlo(cfg, mc.trials, mc.seed)?;
                let secs = start.elapsed().as_secs_f64();
                let _ = writeln!(err, "simulate k={} trials={} {secs:.3}s", cfg.k, mc.trials);
                t.push(vec![
                    Cell::Int(cfg.k as u64),
                    Cell::Int(1 << cfg.k),
                    Cell::Num(cfg.epsilon),
                    Cell::Int(s.trials),
                    Cell::Int(s.errors),
                    Cell::Num(s.avg_tau),
                    Cell::Num(s.tau_stderr),
                    Cell::Num(s.rate),
                    Cell::Num(s.pe_hat),
                    Cell::Num(s.pe_ci_lo),
                    Cell::Num(s.pe_ci_hi),
                    Cell::Num(s.avg_nu),
                    Cell::Num(s.nu_stderr),
                    Cell::Num(s.avg_confirm),
                    Cell::Num(s.confirm_stderr),
                    Cell::Num(s.avg_fallbacks),
                    timing_cell(mc.timing, secs),
                ]);
            }
            Ok(Rendered::ok(t, out))
        }
        Command::Sweep { channel, point, mc, out } => {
            check_trials(mc.trials, 1)?;
            let cfgs = configs(channel.spec()?, &point, mc.algorithm.into())?;
            let rows = sweep(&cfgs, mc.trials, mc.seed)?;
            let mut t = Table::new(&SWEEP_HEADER);
            let mut failure = None;
            for row in rows {
                let _ = writeln!(err, "sweep k={} trials={} {:.3}s", row.k, row.trials, row.runtime_s);
                let (summary, bounds) = match (row.summary, row.bounds) {
                    (Ok(s), Ok(b)) => (Some(s), Some(b)),
                    (s, b) => {
                        let e = s.err().or(b.err()).expect("one side failed");
                        let _ = writeln!(err, "sweep k={}: {e}", row.k);
                        failure.get_or_insert(e);
                        (None, None)
                    }
                };
                t.push(sweep_cells(row.k, row.epsilon, row.trials, summary.as_ref(), bounds.as_ref(), timing_cell(mc.timing, row.runtime_s)));
            }
            Ok(Rendered { text: t.render(out.format), path: out.output, failure })
        }
        Command::Firstpassage { n, p, delta0, epsilon, trials, seed, out } => {
            check_trials(trials, 2)?;
            let prob = match (n, epsilon) {
                (Some(n), _) => {
                    let d = match delta0 {
                        Some(d) => d,
                        None => FirstPassageProblem::new(n, p, 1.0)?.fixed_point_delta(),
                    };
                    FirstPassageProblem::new(n, p, d)?
                }
                (None, Some(eps)) => {
                    let base = FirstPassageProblem::for_bsc(p, eps)?;
                    FirstPassageProblem::new(base.n, p, delta0.unwrap_or(base.delta0))?
                }
                (None, None) => return Err(CliError::Usage("give --n or --epsilon".into())),
            };
            let closed = v0_closed_form(&prob);
            let solved = node_solve(&prob)?[0];
            let mc = mc_first_passage(&prob, trials, seed)?;
            let mut t = Table::new(&[
                "n", "p", "delta0", "delta_last", "v0_closed", "v0_solve", "v0_mc", "mc_stderr", "mc_trials",
                "mc_within_3se",
            ]);
            t.push(vec![
                Cell::Int(prob.n as u64),
                Cell::Num(prob.p),
                Cell::Num(prob.delta0),
                Cell::Num(delta_recursion(&prob)),
                Cell::Num(closed),
                Cell::Num(solved),
                Cell::Num(mc.mean),
                Cell::Num(mc.stderr),
                Cell::Int(mc.trials),
                Cell::Text(((mc.mean - closed).abs() <= 3.0 * mc.stderr).to_string()),
            ]);
            Ok(Rendered::ok(t, out))
        }
    }
}

fn timing_cell(enabled: bool, secs: f64) -> Cell {
    if enabled {
        Cell::Num(secs)
    } else {
        Cell::Empty
    }
}

fn stats_table(spec: &ChannelSpec) -> Result<Table, CliError> {
    let s = spec.stats()?;
    let (raw0, raw1) = spec.original();
    let mut t = Table::new(&[
        "p0", "p1", "relabel", "reg_p0", "reg_p1", "C", "C1", "C2", "pi0_star", "pi1_star", "lambda", "lambda1",
    ]);
    t.push(vec![
        Cell::Num(raw0),
        Cell::Num(raw1),
        Cell::Text(format!("{:?}", spec.relabel())),
        Cell::Num(spec.p0()),
        Cell::Num(spec.p1()),
        Cell::Fixed(s.c, 4),
        Cell::Fixed(s.c1, 4),
        Cell::Fixed(s.c2, 4),
        Cell::Fixed(s.pi0_star, 4),
        Cell::Fixed(s.pi1_star, 4),
        Cell::Fixed(s.lambda, 4),
        Cell::Fixed(s.lambda1, 4),
    ]);
    Ok(t)
}

/// One sweep CSV row; simulation or bound cells are empty when missing.
pub fn sweep_cells(
    k: u32,
    epsilon: f64,
    trials: u64,
    s: Option<&SimSummary>,
    b: Option<&BoundSet>,
    runtime: Cell,
) -> Vec<Cell> {
    let num = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
    vec![
        Cell::Int(k as u64),
        Cell::Int(1 << k),
        Cell::Num(epsilon),
        Cell::Int(trials),
        num(s.map(|s| s.avg_tau)),
        num(s.map(|s| s.tau_stderr)),
        num(s.map(|s| s.rate)),
        num(s.map(|s| s.pe_hat)),
        num(s.map(|s| s.pe_ci_hi)),
        num(b.map(|b| b.thm1)),
        num(b.map(|b| b.cor1)),
        num(b.map(|b| b.thm3_bac)),
        num(b.and_then(|b| b.thm6_bsc)),
        num(b.map(|b| b.converse_vlf)),
        runtime,
    ]
}

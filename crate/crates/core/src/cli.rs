//! Command-line front end: argument parsing, dispatch and output.
//!
//! Exit codes: 0 success, 1 invalid arguments or I/O failure, 2 a failed
//! `--check` or verification.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{
    entropy, exact_e_m, exact_e_m_pairs, exact_inf_min_prob, exact_var_m, f_k_l_log, g_of_c,
    lambda4, lambda4_interval, mu3, mu4, s_t_k_log, scan, solve_gamma, x_of_c,
};
use crate::error::Error;
use crate::experiments::{self, ExperimentConfig, ExperimentKind, OutputFormat, RunOutput};
use crate::report::{fmt_sig12, to_csv, to_json};
use crate::stirling::{stirling_exact, stirling_log};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "randmap",
    version,
    about = "Partition lattice of random maps [n] -> [n]: exact values, exponent curves, simulations and self-checks",
    long_about = "Partition lattice of random maps [n] -> [n].\n\n\
        Elements are 0-indexed: element i here is element i+1 of {1..n}.\n\n\
        Subcommands:\n  \
        exact    stirling | inf-min | moments | exhaustive\n  \
        numeric  gamma | g | entropy | x | mu4 | lambda4 | mu3 | lambda4-interval | fkl | stk\n  \
        simulate inf-min | sup-max | singletons | two-blocks | largest-block | threshold-scan\n  \
        verify   all | stirling | lattice | kfree | oracle\n\n\
        The exact Stirling cap (default 2000) can be overridden with RANDMAP_STIRLING_CAP."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact values: Stirling numbers, inf-minimality probability, moments of M, exhaustive enumeration
    Exact {
        #[command(subcommand)]
        what: ExactCommand,
    },
    /// Exponent curves and bound functions
    Numeric(NumericArgs),
    /// Monte Carlo experiments
    Simulate(SimulateArgs),
    /// Run the self-check suite
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// S(n, k), exact decimal or natural log with --log
    Stirling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        log: bool,
    },
    /// P(inf of t map partitions is all singletons)
    InfMin {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
    },
    /// Exact E[M], E[C(M,2)] and Var(M) for the supremum of t map partitions
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
    },
    /// Exact expectation by visiting all n^(t n) map tuples
    Exhaustive {
        #[arg(long)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NumericFn {
    Gamma,
    G,
    Entropy,
    X,
    Mu4,
    Lambda4,
    Mu3,
    Lambda4Interval,
    Fkl,
    Stk,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    #[arg(value_enum)]
    pub function: NumericFn,
    /// Evaluation point
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Evaluate on STEPS+1 evenly spaced points of [A, B], CSV output
    #[arg(long, num_args = 3, value_names = ["A", "B", "STEPS"])]
    pub scan: Option<Vec<String>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct CheckArgs {
    /// Expected value; exit 2 if the result is farther than --tol from it
    #[arg(long, allow_negative_numbers = true, requires = "tol")]
    pub check: Option<f64>,
    #[arg(long, requires = "check")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    InfMin,
    SupMax,
    Singletons,
    TwoBlocks,
    LargestBlock,
    ThresholdScan,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::InfMin => ExperimentKind::InfMin,
            KindArg::SupMax => ExperimentKind::SupMax,
            KindArg::Singletons => ExperimentKind::Singletons,
            KindArg::TwoBlocks => ExperimentKind::TwoBlocks,
            KindArg::LargestBlock => ExperimentKind::LargestBlock,
            KindArg::ThresholdScan => ExperimentKind::ThresholdScan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("seed must be a 64-bit decimal or 0x-hex integer: {e}"))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    /// Number of maps (first t of a threshold scan)
    #[arg(long)]
    pub t: usize,
    /// Last t of a threshold scan (inclusive)
    #[arg(long)]
    pub t_max: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Master seed, decimal or 0x-hex
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    pub seed: u64,
    /// Worker threads (0 = all cores); does not affect results
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Success threshold as a fraction of n (singletons, largest-block)
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Report elapsed_ms as 0 so output is byte-reproducible
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifySuite {
    All,
    Stirling,
    Lattice,
    Kfree,
    Oracle,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: VerifySuite,
    /// Seed for the randomized checks
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    pub seed: u64,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "check failed: {msg}");
            EXIT_CHECK_FAILED
        }
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure::Usage(format!("write failed: {e}"))
}

fn apply_check(check: CheckArgs, value: f64) -> Outcome {
    match (check.check, check.tol) {
        (Some(expected), Some(tol)) => {
            if (value - expected).abs() <= tol {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "value {} is not within {} of {}",
                    fmt_sig12(value),
                    fmt_sig12(tol),
                    fmt_sig12(expected)
                )))
            }
        }
        _ => Ok(()),
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Exact { what } => exact(what, out),
        Command::Numeric(args) => numeric(args, out),
        Command::Simulate(args) => simulate(args, out),
        Command::Verify(args) => run_verify(args, out),
    }
}

fn exact(what: &ExactCommand, out: &mut dyn Write) -> Outcome {
    match *what {
        ExactCommand::Stirling { n, k, log } => {
            if log {
                writeln!(out, "{}", fmt_sig12(stirling_log(n, k)?)).map_err(io_fail)
            } else {
                writeln!(out, "{}", stirling_exact(n, k)?).map_err(io_fail)
            }
        }
        ExactCommand::InfMin { n, t } => {
            writeln!(out, "{}", fmt_sig12(exact_inf_min_prob(n, t)?)).map_err(io_fail)
        }
        ExactCommand::Moments { n, t } => {
            let (m, pairs, var) = (exact_e_m(n, t)?, exact_e_m_pairs(n, t)?, exact_var_m(n, t)?);
            writeln!(out, "n,t,mean_m,mean_pairs_m,var_m").map_err(io_fail)?;
            writeln!(out, "{n},{t},{},{},{}", fmt_sig12(m), fmt_sig12(pairs), fmt_sig12(var))
                .map_err(io_fail)
        }
        ExactCommand::Exhaustive { kind, n, t } => {
            let v = experiments::run_exhaustive(kind.into(), n, t)?;
            writeln!(out, "kind,n,t,total,tuples,value").map_err(io_fail)?;
            writeln!(
                out,
                "{},{n},{t},{},{},{}",
                ExperimentKind::from(kind),
                v.total,
                v.tuples,
                fmt_sig12(v.value)
            )
            .map_err(io_fail)
        }
    }
}

fn need(v: Option<usize>, flag: &str, f: NumericFn) -> std::result::Result<usize, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{f:?} needs --{flag}").to_lowercase()))
}

fn curve(f: NumericFn) -> Option<fn(f64) -> crate::Result<f64>> {
    Some(match f {
        NumericFn::Gamma => |c| solve_gamma(c).map(|s| s.gamma),
        NumericFn::G => g_of_c,
        NumericFn::Entropy => |c| Ok(entropy(c)),
        NumericFn::X => x_of_c,
        NumericFn::Mu4 => mu4,
        NumericFn::Lambda4 => lambda4,
        NumericFn::Mu3 => mu3,
        _ => return None,
    })
}

fn numeric(args: &NumericArgs, out: &mut dyn Write) -> Outcome {
    let f = args.function;
    if let Some(eval) = curve(f) {
        return match (&args.scan, args.c) {
            (Some(_), Some(_)) => Err(Failure::Usage("give either --c or --scan, not both".into())),
            (None, None) => Err(Failure::Usage("curve functions need --c or --scan".into())),
            (None, Some(c)) => {
                let v = eval(c)?;
                writeln!(out, "{}", fmt_sig12(v)).map_err(io_fail)?;
                apply_check(args.check, v)
            }
            (Some(spec), None) => {
                if args.check.check.is_some() {
                    return Err(Failure::Usage("--check applies to single values, not --scan".into()));
                }
                let a: f64 = spec[0].parse().map_err(|_| Failure::Usage(format!("bad scan start {:?}", spec[0])))?;
                let b: f64 = spec[1].parse().map_err(|_| Failure::Usage(format!("bad scan end {:?}", spec[1])))?;
                let steps: usize = spec[2].parse().map_err(|_| Failure::Usage(format!("bad scan steps {:?}", spec[2])))?;
                let rows = scan(eval, a, b, steps)?;
                let mut s = String::from("c,value\n");
                for (c, v) in rows {
                    s.push_str(&format!("{},{}\n", fmt_sig12(c), fmt_sig12(v)));
                }
                out.write_all(s.as_bytes()).map_err(io_fail)
            }
        };
    }
    match f {
        NumericFn::Lambda4Interval => {
            let (lo, hi) = lambda4_interval()?;
            writeln!(out, "lower,upper\n{},{}", fmt_sig12(lo), fmt_sig12(hi)).map_err(io_fail)
        }
        NumericFn::Fkl => {
            let v = f_k_l_log(need(args.n, "n", f)?, need(args.k, "k", f)?, need(args.l, "l", f)?)?;
            writeln!(out, "{}", fmt_sig12(v)).map_err(io_fail)?;
            apply_check(args.check, v)
        }
        NumericFn::Stk => {
            let v = s_t_k_log(need(args.n, "n", f)?, need(args.t, "t", f)?, need(args.k, "k", f)?)?;
            writeln!(out, "{}", fmt_sig12(v)).map_err(io_fail)?;
            apply_check(args.check, v)
        }
        _ => unreachable!("curves handled above"),
    }
}

pub fn simulate_config(args: &SimulateArgs) -> ExperimentConfig {
    ExperimentConfig {
        kind: args.kind.into(),
        n: args.n,
        t: args.t,
        t_max: args.t_max,
        trials: args.trials,
        master_seed: args.seed,
        workers: args.threads,
        format: match args.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
        threshold: args.threshold,
        record_timing: !args.no_timing,
    }
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Outcome {
    let config = simulate_config(args);
    config.validate()?;
    if config.kind == ExperimentKind::ThresholdScan && args.check.check.is_some() {
        return Err(Failure::Usage("--check applies to single estimates, not threshold-scan".into()));
    }
    let mut result = experiments::run(&config)?;
    // the worker count is an execution detail; keep it out of the output
    match &mut result {
        RunOutput::Single(r) => r.config.workers = 0,
        RunOutput::Scan(s) => s.rows.iter_mut().for_each(|r| r.config.workers = 0),
    }
    let text = match config.format {
        OutputFormat::Csv => to_csv(&result),
        OutputFormat::Json => to_json(&result),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(io_fail)?,
    }
    match &result {
        RunOutput::Single(r) => apply_check(args.check, r.estimate),
        RunOutput::Scan(_) => Ok(()),
    }
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let checks = match args.suite {
        VerifySuite::All => verify::verify_all(args.seed)?,
        VerifySuite::Stirling => verify::verify_stirling()?,
        VerifySuite::Lattice => verify::verify_lattice(args.seed)?,
        VerifySuite::Kfree => verify::verify_kfree()?,
        VerifySuite::Oracle => verify::verify_oracle(args.seed)?,
    };
    for c in &checks {
        writeln!(out, "{c}").map_err(io_fail)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} verification checks failed")));
    }
    Ok(())
}

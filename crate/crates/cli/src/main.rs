//! `deco-metrix`: uncertainty, optimal interrogation time and qubit-number
//! scaling for dephasing-limited GHZ and separable sensors.
//!
//! Errors are reported on stderr as one JSON line,
//! `{"error": "<kind>", "message": "..."}`, with a nonzero exit code.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::commands::Run;
use crate::config::ScenarioConfig;

const THREADS_VAR: &str = "DECO_METRIX_THREADS";

#[derive(Parser)]
#[command(name = "deco-metrix", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file of `dotted.key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for written artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Seed for every stochastic path [default: 20190318].
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[arg(long, global = true, value_name = "L")]
    l_min: Option<u32>,

    #[arg(long, global = true, value_name = "L")]
    l_max: Option<u32>,

    #[arg(long, global = true, value_name = "COUNT")]
    l_points: Option<usize>,

    /// Format of tabular artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

const AFTER_HELP: &str = "\
Any config key can be overridden after the command as `--dotted.key value`,
e.g. `deco-metrix optimize --probe.qubits 8 --collective.model static`.
DECO_METRIX_THREADS caps the worker threads used by sweeps.";

#[derive(clap::Args)]
struct Overrides {
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE",
        hide = true
    )]
    rest: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-dependent rates and exponents of both baths on a log time grid.
    Rates(Overrides),
    /// Optimal interrogation time and minimal uncertainty, as JSON.
    Optimize(Overrides),
    /// Optimal uncertainty against qubit number.
    Sweep(Overrides),
    /// Monte Carlo check of the uncertainty formula, as JSON.
    Mc(Overrides),
    /// Regenerate a figure or table.
    Reproduce {
        what: Artifact,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare closed forms with the integrated master equation.
    OracleCheck(Overrides),
    /// Print the effective configuration.
    Config(Overrides),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Artifact {
    Fig1,
    Table1,
    Priorwork,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Fig1 => "fig1",
            Artifact::Table1 => "table1",
            Artifact::Priorwork => "priorwork",
        }
    }
}

/// Error tag for the JSON error line.
#[derive(Debug)]
pub struct Kind {
    kind: &'static str,
    message: String,
}

impl Kind {
    pub fn new(kind: &'static str, message: &str) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn config(message: &str) -> Self {
        Self::new("config", message)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Kind {}

fn error_kind(err: &anyhow::Error) -> &'static str {
    if let Some(k) = err.downcast_ref::<Kind>() {
        return k.kind;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<deco_metrix::Error>() {
            return e.kind();
        }
        if let Some(k) = cause.downcast_ref::<Kind>() {
            return k.kind;
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "error"
}

fn parse_overrides(rest: &[String]) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut it = rest.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            bail!("unexpected argument {arg:?}; overrides look like `--dotted.key value`");
        };
        match key.split_once('=') {
            Some((k, v)) => pairs.push((k.to_string(), v.to_string())),
            None => {
                let value = it.next().with_context(|| format!("--{key} needs a value"))?;
                pairs.push((key.to_string(), value.clone()));
            }
        }
    }
    Ok(pairs)
}

fn configure(cli: &Cli, rest: &[String]) -> Result<ScenarioConfig> {
    let mut cfg = commands::load_config(cli.config.as_deref())?;
    for (key, value) in parse_overrides(rest).context(Kind::config("bad override"))? {
        cfg.set_from_str(&key, &value)
            .context(Kind::config("bad override"))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(l) = cli.l_min {
        cfg.l_min = l;
    }
    if let Some(l) = cli.l_max {
        cfg.l_max = l;
    }
    if let Some(n) = cli.l_points {
        cfg.l_points = n;
    }
    Ok(cfg)
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| Kind::config(&format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building thread pool")
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    init_threads()?;
    let rest = match &cli.command {
        Command::Rates(o)
        | Command::Optimize(o)
        | Command::Sweep(o)
        | Command::Mc(o)
        | Command::OracleCheck(o)
        | Command::Config(o) => &o.rest,
        Command::Reproduce { overrides, .. } => &overrides.rest,
    };
    let cfg = configure(&cli, rest)?;
    let run = Run {
        cfg: &cfg,
        out: &cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Rates(_) => commands::rates(&run),
        Command::Optimize(_) => commands::optimize(&run),
        Command::Sweep(_) => commands::sweep(&run),
        Command::Mc(_) => commands::mc(&run, cfg.seed),
        Command::Reproduce { what, .. } => commands::reproduce(&run, what),
        Command::OracleCheck(_) => commands::oracle_check(&run),
        Command::Config(_) => {
            print!("{}", cfg.dump());
            Ok(serde_json::Value::Null)
        }
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            report("usage", first);
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(serde_json::Value::Null) => ExitCode::SUCCESS,
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let message = err
                .chain()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(": ");
            report(error_kind(&err), &message);
            ExitCode::FAILURE
        }
    }
}

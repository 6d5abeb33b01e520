//! Command-line front end. Exit codes: 0 success (possibly with per-row warnings),
//! 1 validation failure, 2 configuration or usage error, 3 every row failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{Command, Format, SweepConfig};
use super::output::{write_table, Metadata};
use super::{presets, run, validate, SweepError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ALL_ROWS_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "noneq-atomdyn", version, about = "Atom-slab rates, steady states and dynamics out of thermal equilibrium")]
struct Cli {
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Transition rates, effective photon numbers and temperatures over a grid.
    Rates(RunArgs),
    /// Steady states, purity and closest thermal state over a grid.
    Steady(RunArgs),
    /// Density-matrix time series.
    Dynamics(RunArgs),
    /// Runs the command named in the config's `command` field.
    Sweep(RunArgs),
    /// Runs a named figure preset (see `figure --list`).
    Figure(FigureArgs),
    /// Built-in invariant checks.
    Validate,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a shipped preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Output file (default: the config's output.path, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "NONEQ_ATOMDYN_JOBS")]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Preset name.
    #[arg(long, required_unless_present = "list")]
    preset: Option<String>,
    /// List the available presets.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "NONEQ_ATOMDYN_JOBS")]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn load(args: &RunArgs) -> Result<SweepConfig, SweepError> {
    match (&args.config, &args.preset) {
        (Some(p), _) => SweepConfig::load(p),
        (None, Some(name)) => preset_config(name),
        (None, None) => Err(SweepError::Config("give --config <path> or --preset <name>".into())),
    }
}

fn preset_config(name: &str) -> Result<SweepConfig, SweepError> {
    let text = presets::preset(name).ok_or_else(|| {
        SweepError::Config(format!("unknown preset '{name}' (available: {})", presets::names().join(", ")))
    })?;
    SweepConfig::from_toml_str(text)
}

fn execute(cfg: &SweepConfig, command: Command, args: &RunArgs) -> Result<i32, SweepError> {
    let resolved = cfg.resolve(command)?;
    let jobs = args
        .jobs
        .or(cfg.run.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(SweepError::Config("jobs must be >= 1".into()));
    }
    let table = run(&resolved, jobs)?;
    let format = args.format.or(cfg.output.format).unwrap_or_default();
    let meta = Metadata { command: command.name().into(), config_echo: cfg.echo() };
    let out_path = args.out.clone().or_else(|| cfg.output.path.clone());
    let io = |e: std::io::Error| SweepError::Runtime(format!("write failed: {e}"));
    match out_path {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&p).map_err(io)?);
            write_table(&mut f, &table, &meta, format).map_err(io)?;
            f.flush().map_err(io)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_table(&mut lock, &table, &meta, format).map_err(io)?;
        }
    }
    let total = table.rows.len();
    if table.failed == total && total > 0 {
        eprintln!("error: all {total} rows failed");
        return Ok(EXIT_ALL_ROWS_FAILED);
    }
    if table.failed > 0 {
        eprintln!("warning: {} of {total} rows failed (see the status column)", table.failed);
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, SweepError> {
    match cli.cmd {
        Sub::Rates(a) => execute(&load(&a)?, Command::Rates, &a),
        Sub::Steady(a) => execute(&load(&a)?, Command::Steady, &a),
        Sub::Dynamics(a) => execute(&load(&a)?, Command::Dynamics, &a),
        Sub::Sweep(a) => {
            let cfg = load(&a)?;
            let cmd = cfg
                .command
                .ok_or_else(|| SweepError::Config("sweep needs a top-level `command` in the config".into()))?;
            execute(&cfg, cmd, &a)
        }
        Sub::Figure(f) => {
            if f.list {
                for n in presets::names() {
                    println!("{n}");
                }
                return Ok(EXIT_OK);
            }
            let name = f.preset.clone().unwrap_or_default();
            let cfg = preset_config(&name)?;
            let cmd = cfg
                .command
                .ok_or_else(|| SweepError::Config(format!("preset '{name}' names no command")))?;
            let a = RunArgs { config: None, preset: Some(name), out: f.out, jobs: f.jobs, format: f.format };
            execute(&cfg, cmd, &a)
        }
        Sub::Validate => {
            let report = validate::run_checks(validate::perturbation_from_env());
            print!("{}", report.render());
            Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION_FAILED })
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e @ SweepError::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ALL_ROWS_FAILED
        }
    }
}

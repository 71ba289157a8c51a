//! `mfront <subcommand> --config <path> [--out <dir>] [--jobs N]`
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 numerical
//! failure, 1 I/O failure. Files of an aborted command keep a `_partial`
//! suffix.

mod config;
mod output;
mod presets;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, ProblemOverride};
use output::Output;
use presets::Preset;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<mfront_core::Error> for CliError {
    fn from(e: mfront_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "mfront", version, about = "Interface dynamics experiments for viscous conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory; overrides `experiment.output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for ε-points (default: logical cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReproArgs {
    preset: Preset,
    /// JSON file with a `problem` block replacing the preset's.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the preset configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Exact steady state or one family member.
    Steady(RunArgs),
    /// Leading eigenpairs of the linearised operator.
    Spectrum(RunArgs),
    /// Interface speed over the admissible band.
    Speedmap(RunArgs),
    /// Reduced interface trajectory and halving time.
    SlowMotion(RunArgs),
    /// Time integration of the full problem.
    Simulate(RunArgs),
    /// Spectrum or residual sweep over ε.
    Sweep(RunArgs),
    /// Canned reproduction experiments.
    Repro(ReproArgs),
}

fn load_for(kind: &str, path: &Path) -> Result<ExperimentConfig, CliError> {
    let cfg = config::load(path)?;
    if cfg.experiment.name() != kind {
        return Err(CliError::Validation(format!(
            "config describes a `{}` experiment but the subcommand is `{kind}`",
            cfg.experiment.name()
        )));
    }
    Ok(cfg)
}

fn resolve(cli: Cli) -> Result<Option<(String, ExperimentConfig, Common)>, CliError> {
    let (kind, args) = match cli.command {
        Command::Steady(a) => ("steady", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Speedmap(a) => ("speedmap", a),
        Command::SlowMotion(a) => ("slow-motion", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Repro(r) => {
            let mut cfg = r.preset.config();
            if let Some(p) = &r.config {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
                let o: ProblemOverride = config::parse(&text)?;
                cfg.problem = o.problem;
            }
            if r.print_config {
                println!("{}", serde_json::to_string_pretty(&cfg).expect("config serialises"));
                return Ok(None);
            }
            return Ok(Some((format!("repro {}", r.preset.name()), cfg, r.common)));
        }
    };
    let cfg = load_for(kind, &args.config)?;
    Ok(Some((kind.to_string(), cfg, args.common)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MFRONT_LOG", "warn")).init();
    let cli = Cli::parse();
    let (command, cfg, common) = match resolve(cli) {
        Ok(Some(v)) => v,
        Ok(None) => return ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfront: {e}");
            return ExitCode::from(e.code());
        }
    };
    if let Some(j) = common.jobs {
        if j == 0 {
            eprintln!("mfront: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let dir = common
        .out
        .or_else(|| cfg.experiment.output().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("mfront-out"));
    let mut out = match Output::new(&dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mfront: cannot create {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    };

    let t0 = Instant::now();
    let report = run::execute(&cfg, &mut out);
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "wall_time_s": t0.elapsed().as_secs_f64(),
        "points": report.points,
        "summary": report.extra,
        "error": report.error.as_ref().map(|e| e.to_string()),
    });
    let written = out.write("metadata.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        writeln!(w)
    });
    if let Err(e) = written {
        eprintln!("mfront: {e}");
        return ExitCode::from(1);
    }
    match report.error {
        Some(e) => {
            eprintln!("mfront: {e} (outputs left with a _partial suffix in {})", dir.display());
            ExitCode::from(e.code())
        }
        None => match out.commit() {
            Ok(files) => {
                log::info!("wrote {} files to {}", files.len(), dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("mfront: {e}");
                ExitCode::from(1)
            }
        },
    }
}

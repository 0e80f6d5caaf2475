//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use qosc::commands::{run_output, run_sweep};
use qosc::config::{apply_set, OutputKind, RunConfig, Sweep};
use qosc::figures::write_figures;
use qosc::output::{create, write_json};
use qosc::verify::{self, Level};
use qosc::{Error, Result};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "QOSC_OUT_DIR";

#[derive(Parser)]
#[command(name = "qosc", version, about = "Damped, driven quantum oscillator: Gaussian-state propagation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the QOSC_OUT_DIR environment variable.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the randomized checks.
    #[arg(long, global = true, default_value_t = 20240611)]
    seed: u64,
    /// Override a configuration entry, `key.path=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "K=V")]
    set: Vec<String>,
    /// Run a sweep `key.path=start:stop:n` concurrently.
    #[arg(long, global = true, value_name = "K=a:b:n")]
    sweep: Option<String>,
    /// Log-spaced output times.
    #[arg(long, global = true)]
    log_grid: bool,
}

#[derive(Subcommand)]
enum Command {
    /// First and second moments along the configured time grid.
    Trajectory,
    /// Wigner function on the configured grid.
    Wigner,
    /// Steady-state ellipse of harmonic driving.
    Ellipse,
    /// Dense spectrum of the truncated generator.
    Spectrum,
    /// Every output listed in the configuration.
    Run,
    /// Verification suites; exit status 1 when a check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
    /// All figure data sets.
    Figures,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_document(common: &Common) -> Result<Value> {
    let path = common.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for s in &common.set {
        apply_set(&mut doc, s)?;
    }
    if common.log_grid {
        doc["log_grid"] = Value::Bool(true);
    }
    Ok(doc)
}

fn run_kinds(common: &Common, kinds: Option<&[OutputKind]>, dir: &Path) -> Result<Vec<PathBuf>> {
    let doc = load_document(common)?;
    if let Some(spec) = &common.sweep {
        let sweep = Sweep::parse(spec)?;
        let kinds = match kinds {
            Some(k) => k.to_vec(),
            None => RunConfig::from_value(sweep.documents(&doc)?.remove(0))?.outputs,
        };
        return run_sweep(&doc, &sweep, &kinds, dir, common.seed);
    }
    let cfg = RunConfig::from_value(doc)?;
    let kinds = kinds.map(<[OutputKind]>::to_vec).unwrap_or_else(|| cfg.outputs.clone());
    let mut files = Vec::new();
    for k in kinds {
        files.extend(run_output(&cfg, k, dir, common.seed)?);
    }
    Ok(files)
}

fn execute(cli: &Cli) -> Result<bool> {
    let dir = out_dir(&cli.common);
    let files = match &cli.command {
        Command::Trajectory => run_kinds(&cli.common, Some(&[OutputKind::Trajectory]), &dir)?,
        Command::Wigner => run_kinds(&cli.common, Some(&[OutputKind::Wigner]), &dir)?,
        Command::Ellipse => run_kinds(&cli.common, Some(&[OutputKind::Ellipse]), &dir)?,
        Command::Spectrum => run_kinds(&cli.common, Some(&[OutputKind::Spectrum]), &dir)?,
        Command::Run => run_kinds(&cli.common, None, &dir)?,
        Command::Figures => write_figures(&dir)?,
        Command::Verify { level } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = verify::run(level, cli.common.seed)?;
            let path = dir.join("verify.json");
            write_json(create(&path)?, &report)?;
            write_json(std::io::stdout().lock(), &report)?;
            return Ok(report.pass);
        }
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // Help and version requests.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(2)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use auxin_cli::{
    load_config_with, load_preset, run, verify, CliError, ExperimentConfig, Registry, RunManifest,
    OUT_ROOT_ENV, PRESETS,
};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

/// Travelling auxin pulses: simulations, measurements and long-wave profiles.
#[derive(Parser)]
#[command(name = "auxin", version)]
struct Cli {
    /// Directory under which run directories are created.
    #[arg(long, global = true, env = OUT_ROOT_ENV, default_value = "runs")]
    out_root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single pulse from a seeded first cell.
    Simulate(RunArgs),
    /// Amplitude sweep with power-law fits.
    Sweep(RunArgs),
    /// Pulse train under constant influx.
    Wavetrain(RunArgs),
    /// Leading-order profiles.
    Profiles(RunArgs),
    /// Long-wave fixed-point solves.
    Longwave(RunArgs),
    /// Any registered experiment, selected by the config.
    Run(RunArgs),
    /// Re-run a recorded run and compare output hashes.
    Verify { run_dir: PathBuf },
    /// List experiment kinds and shipped presets.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped configuration by name (see `auxin list`).
    #[arg(long)]
    preset: Option<String>,
    /// Override a field, e.g. `--set experiment.a_diamond=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run directory, replacing <out-root>/<output_dir>.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_RUN: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

fn exit_for(e: &CliError) -> u8 {
    match e {
        CliError::Parse { .. } | CliError::Validation(_) | CliError::UnknownKind { .. } => {
            EXIT_CONFIG
        }
        _ => EXIT_RUN,
    }
}

fn load(
    args: &RunArgs,
    kind: Option<&str>,
    registry: &Registry,
) -> Result<ExperimentConfig, CliError> {
    let cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config_with(path, &args.overrides, registry)?,
        (None, Some(name)) => load_preset(name, &args.overrides, registry)?,
        (None, None) => {
            let kind = kind
                .ok_or_else(|| CliError::Validation("`run` needs --config or --preset".into()))?;
            let mut doc = serde_json::to_value(ExperimentConfig::default_for(kind))?;
            for o in &args.overrides {
                auxin_cli::apply_override(&mut doc, o)?;
            }
            auxin_cli::config::resolve_value(doc, registry)?
        }
    };
    match kind {
        Some(k) if k != cfg.kind() => Err(CliError::Validation(format!(
            "this subcommand runs {k:?} but the config names {:?}",
            cfg.kind()
        ))),
        _ => Ok(cfg),
    }
}

fn execute(
    args: &RunArgs,
    kind: Option<&str>,
    out_root: &Path,
    registry: &Registry,
) -> Result<RunManifest, CliError> {
    let cfg = load(args, kind, registry)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| out_root.join(cfg.run_dir_name()));
    let manifest = run(&cfg, registry, &dir)?;
    println!("run directory: {}", dir.display());
    for f in &manifest.outputs {
        println!(
            "  {:<24} {:>10} bytes  {}",
            f.path,
            f.bytes,
            &f.sha256[..16]
        );
    }
    println!(
        "status: {:?} ({:.2} s)",
        manifest.status, manifest.wall_time_s
    );
    Ok(manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let registry = Registry::builtin();
    let (args, kind) = match &cli.command {
        Command::Simulate(a) => (a, Some("pulse_run")),
        Command::Sweep(a) => (a, Some("sweep")),
        Command::Wavetrain(a) => (a, Some("wavetrain")),
        Command::Profiles(a) => (a, Some("profiles")),
        Command::Longwave(a) => (a, Some("longwave")),
        Command::Run(a) => (a, None),
        Command::List => {
            println!("experiment kinds:");
            for k in registry.kinds() {
                let runner = registry.get(k).expect("listed kind is registered");
                println!("  {k:<10} {}", runner.summary());
            }
            println!("presets:");
            for (name, text) in PRESETS {
                let kind = serde_json::from_str::<Value>(text)
                    .ok()
                    .and_then(|v| v["experiment"]["kind"].as_str().map(str::to_string))
                    .unwrap_or_default();
                println!("  {name:<10} {kind}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Verify { run_dir } => {
            return match verify(run_dir, &registry) {
                Ok(report) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).unwrap_or_default()
                    );
                    if report.is_clean() {
                        println!("verify: {} outputs reproduced", report.matched.len());
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("verify: outputs differ from the manifest");
                        ExitCode::from(EXIT_VERIFY)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_for(&e))
                }
            };
        }
    };
    match execute(args, kind, &cli.out_root, &registry) {
        Ok(m) if m.is_ok() => ExitCode::SUCCESS,
        Ok(m) => {
            if let Some(e) = &m.error {
                eprintln!("error ({}): {}", e.kind, e.message);
            }
            ExitCode::from(EXIT_RUN)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use planar_eikonal::config::{parse_momentum, preset, presets, RunConfig};
use planar_eikonal::output::read_csv;
use planar_eikonal::xsec::Route;
use planar_eikonal::{app, validate, Error, Result};

/// Eikonal scattering spectra for stacks of atomic planes.
#[derive(Parser)]
#[command(name = "planar-eikonal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (see `presets list`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Route to compute; may be repeated.
    #[arg(long = "route")]
    routes: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest momentum, e.g. `40.8kev` or `4.0` (in 1/R).
    #[arg(long)]
    q_max: Option<String>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute spectra and write CSV plus JSON metadata.
    Run(Common),
    /// Run the numerical self-checks and print a JSON report.
    Validate(Common),
    /// Check that a spectrum CSV follows the output schema.
    CheckCsv { path: PathBuf },
    /// Inspect the shipped presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names and descriptions.
    List,
    /// Print a preset as TOML.
    Show { name: String },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut config = match (&common.config, &common.preset) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset("fig_plane1")?,
    };
    if !common.routes.is_empty() {
        config.routes = common
            .routes
            .iter()
            .map(|r| Route::parse(r))
            .collect::<Result<_>>()?;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(q) = &common.q_max {
        config.q_range.max = parse_momentum(q)?;
    }
    if let Some(out) = &common.out {
        config.output.dir = out.clone();
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(common) => {
            let config = load(&common)?;
            let artifacts = app::run(&config, &config.output.dir)?;
            let files: Vec<String> = artifacts
                .csv_files
                .iter()
                .chain(std::iter::once(&artifacts.sidecar))
                .map(|p| p.display().to_string())
                .collect();
            println!("{}", json!({ "status": "ok", "files": files }));
            Ok(true)
        }
        Command::Validate(common) => {
            let config = load(&common)?;
            let report = validate::validate(&config.resolve()?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed)
        }
        Command::CheckCsv { path } => {
            let rows = read_csv(&path)?;
            println!("{}", json!({ "status": "ok", "rows": rows.len() }));
            Ok(true)
        }
        Command::Presets {
            action: PresetAction::List,
        } => {
            for p in presets() {
                println!("{:<16} {}", p.name, p.description);
            }
            Ok(true)
        }
        Command::Presets {
            action: PresetAction::Show { name },
        } => {
            print!("{}", preset(&name)?.to_toml_string()?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "status": "error", "kind": e.kind(), "message": e.to_string() })
            );
            ExitCode::from(2)
        }
    }
}

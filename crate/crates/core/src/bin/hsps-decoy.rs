use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hsps_decoy::config::{parse_config, RunManifest};
use hsps_decoy::optimizer::SweepConfig;
use hsps_decoy::report::{self, RunError};

/// Decoy-state BB84 key rates for heralded single photon and coherent sources.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--override alpha_db_per_km=0.25`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep distance and write one CSV row per distance and source.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write the plot data of one of the comparison figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        number: u8,
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Bounds and key rate from recorded counts (TOML with [vacuum], [decoy], [signal]).
    Bounds {
        counts: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also write `bounds.txt` and `manifest.toml` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<SweepConfig, RunError> {
    Ok(parse_config(common.config.as_deref(), &common.overrides)?)
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Sweep { common, out } => {
            let cfg = load(&common)?;
            report::run_sweep(&cfg, &out)?;
            println!("wrote {}", out.join("sweep.csv").display());
        }
        Command::Figure { number, common, out } => {
            let cfg = load(&common)?;
            let manifest = report::run_figure(number, &cfg, &out)?;
            for a in &manifest.artifacts {
                println!("wrote {}", out.join(a).display());
            }
        }
        Command::Bounds { counts, common, out } => {
            let cfg = load(&common)?;
            let counts = report::read_counts_file(&counts)?;
            let text = report::bounds_from_counts(&counts, &cfg)?.to_text();
            print!("{text}");
            if let Some(out) = out {
                let io = |path: PathBuf| move |source| RunError::Io { path, source };
                fs::create_dir_all(&out).map_err(io(out.clone()))?;
                let path = out.join("bounds.txt");
                fs::write(&path, &text).map_err(io(path.clone()))?;
                let mut manifest = RunManifest::new("bounds", &cfg);
                manifest.artifacts.push("bounds.txt".into());
                let path = out.join("manifest.toml");
                fs::write(&path, manifest.to_toml()).map_err(io(path.clone()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

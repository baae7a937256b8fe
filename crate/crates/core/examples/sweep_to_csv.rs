//! Configure a sweep from TOML plus overrides and write the CSV table.
//!
//! Usage: cargo run --example sweep_to_csv -- [output.csv]

use std::path::PathBuf;

use hsps_decoy::config::{parse_config, ConfigFile};
use hsps_decoy::optimizer::sweep_distances;
use hsps_decoy::report::emit_csv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("sweep.csv"), PathBuf::from);

    let toml = "\
alpha_db_per_km = 0.2
dist_stop_km = 150
dist_step_km = 10
sources = \"both\"
";
    let cfg = ConfigFile::from_toml(toml)?.resolve()?;
    println!("from TOML: alpha = {}", cfg.protocol.channel.alpha_db_per_km);

    // command-line style overrides win over the file
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("sweep.toml");
    std::fs::write(&path, toml)?;
    let cfg = parse_config(Some(&path), &["mu=0.03".into(), "eta_a=0.7".into()])?;
    println!("with overrides: mu = {}, eta_A = {}", cfg.mu, cfg.protocol.eta_a);

    let points = sweep_distances(&cfg)?;
    emit_csv(&points, &out)?;
    println!("{} rows written to {}", points.len(), out.display());
    Ok(())
}

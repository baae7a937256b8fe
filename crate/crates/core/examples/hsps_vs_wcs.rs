//! Heralded source against a coherent-state source, with a good and a
//! mediocre trigger detector.

use hsps_decoy::optimizer::SweepConfig;
use hsps_decoy::report::compute_figure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SweepConfig::default();
    for (fig, eta_a) in [(2, 0.8), (3, 0.6)] {
        let data = compute_figure(fig, &cfg)?;
        println!("eta_A = {eta_a}");
        for label in &data.labels {
            let at20 = data.rate(label, 20.0).unwrap_or(f64::NAN);
            let cutoff = data.cutoff(label).map_or("-".to_string(), |c| format!("{c:.1} km"));
            println!("  {label:<13} R(20 km) = {at20:.3e}  cutoff = {cutoff}");
        }
    }
    Ok(())
}

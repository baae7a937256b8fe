//! Key rate against distance for three decoy intensities plus the ideal
//! benchmark, printed every 20 km.

use hsps_decoy::optimizer::SweepConfig;
use hsps_decoy::report::compute_figure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = compute_figure(1, &SweepConfig::default())?;
    print!("{:>6}", "L/km");
    for l in &data.labels {
        print!("  {l:>11}");
    }
    println!();
    for (i, d) in data.distances.iter().enumerate().step_by(20) {
        print!("{d:>6}");
        for rates in &data.rates {
            print!("  {:>11.3e}", rates[i]);
        }
        println!();
    }
    println!();
    for (label, cutoff) in data.labels.iter().zip(&data.cutoffs) {
        match cutoff {
            Some(km) => println!("{label:>8}: secure up to {km:.1} km"),
            None => println!("{label:>8}: never secure"),
        }
    }
    Ok(())
}

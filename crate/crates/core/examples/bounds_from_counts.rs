//! Security bounds from tallies an experiment would record.
//!
//! The counts here are the expected values for a 60 km link; replace them
//! with measured numbers to analyse a real run.

use hsps_decoy::bounds::{hsps_security_bounds, key_rate_hsps, Pulse};
use hsps_decoy::observables::{statistics_from_counts, IntensityCounts, RawCounts};

fn main() -> hsps_decoy::Result<()> {
    let counts = RawCounts {
        vacuum: IntensityCounts {
            sent: 1e11,
            triggered: 1e11,
            clicks: 170_000.0,
            errors: 85_000.0,
        },
        decoy: IntensityCounts {
            sent: 1e11,
            triggered: 3.81e9,
            clicks: 2.2e7,
            errors: 7.9e5,
        },
        signal: IntensityCounts {
            sent: 1e11,
            triggered: 1.46e10,
            clicks: 1.05e8,
            errors: 3.6e6,
        },
    };
    let obs = statistics_from_counts(0.05, 0.2, counts)?;
    println!(
        "Y0 = {:.4e}  Y_mu = {:.4e}  Y_mu' = {:.4e}",
        obs.y0, obs.y_mu, obs.y_mu_prime
    );
    println!("E_mu = {:.4}  E_mu' = {:.4}", obs.e_mu, obs.e_mu_prime);

    let bounds = hsps_security_bounds(&obs, 0.8, 1e-5, Pulse::Decoy)?;
    println!("Y1 >= {:.4e}", bounds.y1_lower);
    println!("delta1 = {:.4}", bounds.delta1);
    println!("e1 <= {:.4}", bounds.e1_upper);
    println!("feasible = {}", bounds.feasible);
    println!("key rate = {:.4e} bits per pulse", key_rate_hsps(&obs, &bounds, 1.2));
    Ok(())
}

//! Pick the signal intensity that maximizes the key rate at a few distances.

use hsps_decoy::bounds::SourceKind;
use hsps_decoy::optimizer::{optimize_mu_and_mu_prime, optimize_mu_prime, SearchRange};
use hsps_decoy::protocol::ProtocolParams;

fn main() -> hsps_decoy::Result<()> {
    let mu = 0.05;
    let range = SearchRange::new(mu + 0.01, 1.0, 0.01)?;
    for kind in [SourceKind::Hsps, SourceKind::Wcs] {
        println!("{kind}");
        for l in [0.0, 50.0, 100.0, 140.0] {
            let params = ProtocolParams::default().at_distance(l);
            let best = optimize_mu_prime(kind, mu, &range, &params)?;
            println!("  L = {l:>5} km  mu' = {:.4}  R = {:.4e}", best.mu_prime, best.key_rate);
        }
    }

    // the decoy intensity can be searched too
    let params = ProtocolParams::default().at_distance(100.0);
    let mus: Vec<f64> = (1..=10).map(|i| i as f64 * 0.01).collect();
    let (best_mu, best) = optimize_mu_and_mu_prime(SourceKind::Hsps, &mus, &range, &params)?;
    println!(
        "joint at 100 km: mu = {best_mu}, mu' = {:.4}, R = {:.4e}",
        best.mu_prime, best.key_rate
    );
    Ok(())
}

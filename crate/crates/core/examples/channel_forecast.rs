//! Observables a no-eavesdropper fiber link would produce for both sources.

use hsps_decoy::channel::{overall_transmittance, ChannelParams};
use hsps_decoy::observables::{forecast_observables, forecast_wcs_observables};

fn main() -> hsps_decoy::Result<()> {
    let (mu, mu_prime) = (0.05, 0.25);
    println!(
        "{:>5}  {:>10}  {:>11} {:>11} {:>9}  {:>11} {:>9}",
        "L/km", "eta", "Y~_mu'", "Y_mu'", "E_mu'", "Q_mu'", "E_mu'"
    );
    for l in (0..=150).step_by(25) {
        let ch = ChannelParams::telecom_fiber().at_distance(l as f64);
        let hsps = forecast_observables(mu, mu_prime, 0.8, 1e-5, &ch)?;
        let wcs = forecast_wcs_observables(mu, mu_prime, &ch)?;
        println!(
            "{l:>5}  {:>10.3e}  {:>11.4e} {:>11.4e} {:>9.5}  {:>11.4e} {:>9.5}",
            overall_transmittance(&ch),
            hsps.ty_mu_prime,
            hsps.y_mu_prime,
            hsps.e_mu_prime,
            wcs.q_mu_prime,
            wcs.e_mu_prime
        );
    }
    Ok(())
}

//! Photon-number statistics of a heralded source next to a coherent one.
//!
//! Shows how much of the triggered output is single photons and how the
//! trigger detector suppresses the vacuum.

use hsps_decoy::source::{
    poisson_multiphoton_probability, poisson_weight, post_selection_probability, thermal_multiphoton_probability,
    triggered_distribution, HeraldedSourceParams,
};

fn main() -> hsps_decoy::Result<()> {
    let src = HeraldedSourceParams::new(0.1, 0.8, 1e-5)?;
    println!("x = {}, eta_A = {}, d_A = {}", src.x, src.eta_a, src.d_a);
    println!("trigger probability P_post = {:.6e}", post_selection_probability(&src));
    println!();
    println!("{:>3}  {:>14}  {:>14}", "n", "triggered", "poisson");
    for n in 0..=5 {
        println!(
            "{n:>3}  {:>14.6e}  {:>14.6e}",
            triggered_distribution(n, &src)?,
            poisson_weight(n, src.x)
        );
    }
    println!();
    for x in [0.01, 0.05, 0.1, 0.5] {
        println!(
            "x = {x:<4}  P(n>=2): thermal {:.3e}  poisson {:.3e}",
            thermal_multiphoton_probability(x),
            poisson_multiphoton_probability(x)
        );
    }
    Ok(())
}

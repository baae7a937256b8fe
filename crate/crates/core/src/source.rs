//! Photon-number statistics of the two sources under comparison.
//!
//! The heralded source is one arm of a two-mode squeezed vacuum whose
//! untriggered marginal is thermal with mean photon number `x`:
//! `a_n(x) = x^n / (1 + x)^(n + 1)`. Conditioning on a click of Alice's
//! threshold trigger detector (efficiency `eta_a`, dark count `d_a`) reweights
//! each Fock component by its trigger probability. The coherent source is
//! Poissonian and serves as the comparison baseline.

use crate::error::{check_nonnegative, check_unit_closed, check_unit_half_open, Error, Result};

/// Intensity and trigger-detector parameters of a heralded source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldedSourceParams {
    /// Mean photon number of one mode before triggering.
    pub x: f64,
    /// Trigger-detector efficiency.
    pub eta_a: f64,
    /// Trigger-detector dark-count probability per pulse.
    pub d_a: f64,
}

impl HeraldedSourceParams {
    pub fn new(x: f64, eta_a: f64, d_a: f64) -> Result<Self> {
        check_nonnegative("x", x)?;
        check_unit_closed("eta_a", eta_a)?;
        check_unit_half_open("d_a", d_a)?;
        Ok(Self { x, eta_a, d_a })
    }

    /// Same trigger detector, different pump intensity.
    pub fn with_intensity(self, x: f64) -> Result<Self> {
        Self::new(x, self.eta_a, self.d_a)
    }
}

/// Mean photon number of a Poissonian (weak coherent) pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSourceParams {
    pub mu: f64,
}

impl CoherentSourceParams {
    pub fn new(mu: f64) -> Result<Self> {
        check_nonnegative("mu", mu)?;
        Ok(Self { mu })
    }
}

/// Thermal weight `x^n / (1 + x)^(n + 1)` of the untriggered mode.
pub fn thermal_weight(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "thermal weights are defined for n >= 1",
        });
    }
    check_nonnegative("x", x)?;
    Ok(thermal_weight_unchecked(n, x))
}

pub(crate) fn thermal_weight_unchecked(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ratio = x / (1.0 + x);
    ratio.powi(n as i32) / (1.0 + x)
}

/// Closed form of `sum_{n>=1} a_n(x) q^n = q x / ((1 + x)(1 + x - q x))`.
pub fn thermal_generating_sum(x: f64, q: f64) -> f64 {
    q * x / ((1.0 + x) * (1.0 + x - q * x))
}

/// Probability that Alice's trigger detector fires for a pulse of intensity `x`:
/// `d_a / (1 + x) + x eta_a / (1 + x eta_a)`.
pub fn post_selection_probability(src: &HeraldedSourceParams) -> f64 {
    let HeraldedSourceParams { x, eta_a, d_a } = *src;
    d_a / (1.0 + x) + x * eta_a / (1.0 + x * eta_a)
}

/// Photon-number distribution of the heralded mode, conditioned on a trigger.
pub fn triggered_distribution(n: u32, src: &HeraldedSourceParams) -> Result<f64> {
    let p_post = post_selection_probability(src);
    if p_post <= 0.0 {
        return Err(Error::NoTrigger);
    }
    let weight = if n == 0 {
        src.d_a / (1.0 + src.x)
    } else {
        trigger_probability(n, src.eta_a) * thermal_weight_unchecked(n, src.x)
    };
    Ok(weight / p_post)
}

/// `1 - (1 - eta)^n`, computed without cancellation for small `eta`.
pub(crate) fn trigger_probability(n: u32, eta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    -((n as f64) * (-eta).ln_1p()).exp_m1()
}

/// Poissonian weight `e^(-mu) mu^n / n!`.
pub fn poisson_weight(n: u32, mu: f64) -> f64 {
    let mut w = (-mu).exp();
    for k in 1..=n {
        w *= mu / k as f64;
    }
    w
}

/// Probability mass of `n >= 2` photons in the untriggered thermal mode.
pub fn thermal_multiphoton_probability(x: f64) -> f64 {
    // 1 - a_0 - a_1 = (x / (1 + x))^2
    let r = x / (1.0 + x);
    r * r
}

/// Probability mass of `n >= 2` photons in a Poissonian pulse.
pub fn poisson_multiphoton_probability(mu: f64) -> f64 {
    // 1 - e^-mu (1 + mu), arranged to stay accurate for small mu
    -(-mu).exp_m1() - mu * (-mu).exp()
}

//! What an experimenter would record with no eavesdropper on the line.
//!
//! The forecast evaluates every photon-number sum in closed form. With
//! `u = 1 - eta_a` and `v = 1 - eta`, the single nontrivial sum
//!
//! ```text
//! S = sum_{n>=1} a_n(x) (1 - u^n)(1 - v^n)
//!   = x eta eta_a (1 + 2x + x^2 (1 - uv)) / ((1 + x eta)(1 + x eta_a)(1 + x (1 - uv)))
//! ```
//!
//! is arranged so that no two nearly equal quantities are subtracted, which
//! keeps it accurate at the `eta ~ 1e-5` transmittances of long fibers.

use serde::{Deserialize, Serialize};

use crate::channel::{overall_transmittance, ChannelParams};
use crate::error::{check_nonnegative, Error, Result};
use crate::source::{post_selection_probability, HeraldedSourceParams};

/// Raw tallies for one intensity class. Counts are real-valued so that
/// expected counts can be fed through the same path as measured ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityCounts {
    /// Pulses sent (`N_x`).
    pub sent: f64,
    /// Pulses for which Alice's trigger fired (`N_xt`).
    pub triggered: f64,
    /// Bob's clicks within the triggered windows (`n_x`).
    pub clicks: f64,
    /// Clicks whose bit disagreed with Alice's in the error-test subset.
    pub errors: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCounts {
    pub vacuum: IntensityCounts,
    pub decoy: IntensityCounts,
    pub signal: IntensityCounts,
}

/// Yields and error rates for the vacuum, decoy (`mu`) and signal (`mu'`)
/// intensities of a heralded-source run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedStatistics {
    pub mu: f64,
    pub mu_prime: f64,
    /// Yield of vacuum pulses.
    pub y0: f64,
    /// Clicks per triggered pulse.
    pub y_mu: f64,
    pub y_mu_prime: f64,
    /// Clicks per emitted pulse, `Y_x * P_post(x)`.
    pub ty_mu: f64,
    pub ty_mu_prime: f64,
    pub e_mu: f64,
    pub e_mu_prime: f64,
    pub counts: Option<RawCounts>,
}

/// Gains and error rates of a weak-coherent-state run with vacuum, decoy and
/// signal intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcsObservedStatistics {
    pub mu: f64,
    pub mu_prime: f64,
    pub y0: f64,
    pub q_mu: f64,
    pub q_mu_prime: f64,
    pub e_mu: f64,
    pub e_mu_prime: f64,
}

/// `S = sum_{n>=1} a_n(x) (1 - (1 - eta_a)^n)(1 - (1 - eta)^n)`.
pub(crate) fn joint_detection_sum(x: f64, eta_a: f64, eta: f64) -> f64 {
    let both = eta_a + eta - eta_a * eta;
    x * eta * eta_a * (1.0 + 2.0 * x + x * x * both) / ((1.0 + x * eta) * (1.0 + x * eta_a) * (1.0 + x * both))
}

/// Clicks per emitted pulse, `Y~_x = d_A d_B/(1+x) + d_B x eta_a/(1 + x eta_a) + S`.
///
/// The additive dark-count model can exceed one click per trigger when the
/// transmittance approaches 1; the result is capped at `P_post(x)`.
pub fn simulate_rescaled_yield(src: &HeraldedSourceParams, ch: &ChannelParams) -> f64 {
    let HeraldedSourceParams { x, eta_a, d_a } = *src;
    let eta = overall_transmittance(ch);
    let heralded = x * eta_a / (1.0 + x * eta_a);
    let raw = d_a * ch.d_b / (1.0 + x) + ch.d_b * heralded + joint_detection_sum(x, eta_a, eta);
    raw.min(post_selection_probability(src))
}

/// Clicks per triggered pulse, `Y_x = Y~_x / P_post(x)`.
pub fn simulate_yield(src: &HeraldedSourceParams, ch: &ChannelParams) -> Result<f64> {
    let p_post = post_selection_probability(src);
    if p_post <= 0.0 {
        return Err(Error::NoTrigger);
    }
    Ok((simulate_rescaled_yield(src, ch) / p_post).min(1.0))
}

/// Overall QBER of triggered pulses, from `E_x Y~_x = e_0 d_B P_post(x) + e_d S`.
pub fn simulate_qber(src: &HeraldedSourceParams, ch: &ChannelParams) -> Result<f64> {
    let p_post = post_selection_probability(src);
    if p_post <= 0.0 {
        return Err(Error::NoTrigger);
    }
    let ty = simulate_rescaled_yield(src, ch);
    if ty <= 0.0 {
        return Err(Error::NoClicks);
    }
    let eta = overall_transmittance(ch);
    let errors = ch.e_0 * ch.d_b * p_post + ch.e_d * joint_detection_sum(src.x, src.eta_a, eta);
    Ok((errors / ty).min(ch.e_0))
}

/// Gain of a coherent pulse, `Q_mu = d_B + 1 - e^(-eta mu)`, capped at 1.
pub fn simulate_wcs_gain(mu: f64, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    (ch.d_b - (-eta * mu).exp_m1()).min(1.0)
}

pub fn simulate_wcs_qber(mu: f64, ch: &ChannelParams) -> Result<f64> {
    let gain = simulate_wcs_gain(mu, ch);
    if gain <= 0.0 {
        return Err(Error::NoClicks);
    }
    let eta = overall_transmittance(ch);
    let errors = ch.e_0 * ch.d_b - ch.e_d * (-eta * mu).exp_m1();
    Ok((errors / gain).min(ch.e_0))
}

fn check_order(mu: f64, mu_prime: f64) -> Result<()> {
    check_nonnegative("mu", mu)?;
    check_nonnegative("mu_prime", mu_prime)?;
    if mu > 0.0 && mu < mu_prime {
        Ok(())
    } else {
        Err(Error::IntensityOrder { mu, mu_prime })
    }
}

/// No-eavesdropper forecast for a heralded-source run at intensities
/// `0 < mu < mu_prime`. Vacuum pulses click only through Bob's dark counts.
pub fn forecast_observables(
    mu: f64,
    mu_prime: f64,
    eta_a: f64,
    d_a: f64,
    ch: &ChannelParams,
) -> Result<ObservedStatistics> {
    check_order(mu, mu_prime)?;
    let decoy = HeraldedSourceParams::new(mu, eta_a, d_a)?;
    let signal = HeraldedSourceParams::new(mu_prime, eta_a, d_a)?;
    Ok(ObservedStatistics {
        mu,
        mu_prime,
        y0: ch.d_b,
        y_mu: simulate_yield(&decoy, ch)?,
        y_mu_prime: simulate_yield(&signal, ch)?,
        ty_mu: simulate_rescaled_yield(&decoy, ch),
        ty_mu_prime: simulate_rescaled_yield(&signal, ch),
        e_mu: simulate_qber(&decoy, ch)?,
        e_mu_prime: simulate_qber(&signal, ch)?,
        counts: None,
    })
}

pub fn forecast_wcs_observables(mu: f64, mu_prime: f64, ch: &ChannelParams) -> Result<WcsObservedStatistics> {
    check_order(mu, mu_prime)?;
    Ok(WcsObservedStatistics {
        mu,
        mu_prime,
        y0: ch.d_b,
        q_mu: simulate_wcs_gain(mu, ch),
        q_mu_prime: simulate_wcs_gain(mu_prime, ch),
        e_mu: simulate_wcs_qber(mu, ch)?,
        e_mu_prime: simulate_wcs_qber(mu_prime, ch)?,
    })
}

fn counts_to_yields(pulse: &'static str, c: &IntensityCounts) -> Result<(f64, f64, f64)> {
    for v in [c.sent, c.triggered, c.clicks, c.errors] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InconsistentCounts {
                pulse,
                reason: "counts must be finite and non-negative",
            });
        }
    }
    if c.triggered > c.sent {
        return Err(Error::InconsistentCounts {
            pulse,
            reason: "more triggered pulses than pulses sent",
        });
    }
    if c.clicks > c.triggered {
        return Err(Error::InconsistentCounts {
            pulse,
            reason: "more clicks than triggered pulses",
        });
    }
    if c.errors > c.clicks {
        return Err(Error::InconsistentCounts {
            pulse,
            reason: "more errors than clicks",
        });
    }
    if c.triggered == 0.0 {
        return Err(Error::NoTriggeredPulses(pulse));
    }
    let y = c.clicks / c.triggered;
    let ty = (c.triggered / c.sent) * y;
    let e = if c.clicks > 0.0 { c.errors / c.clicks } else { 0.0 };
    Ok((y, ty, e))
}

/// Observed statistics from raw tallies: `Y_x = n_x / N_xt` and
/// `Y~_x = (N_xt / N_x) Y_x`.
pub fn statistics_from_counts(mu: f64, mu_prime: f64, counts: RawCounts) -> Result<ObservedStatistics> {
    check_order(mu, mu_prime)?;
    let (y0, _, _) = counts_to_yields("vacuum", &counts.vacuum)?;
    let (y_mu, ty_mu, e_mu) = counts_to_yields("decoy", &counts.decoy)?;
    let (y_mu_prime, ty_mu_prime, e_mu_prime) = counts_to_yields("signal", &counts.signal)?;
    Ok(ObservedStatistics {
        mu,
        mu_prime,
        y0,
        y_mu,
        y_mu_prime,
        ty_mu,
        ty_mu_prime,
        e_mu,
        e_mu_prime,
        counts: Some(counts),
    })
}

/// Expected tallies for `sent` pulses per intensity under the forecast.
pub fn expected_counts(obs: &ObservedStatistics, p_post_vacuum: f64, sent: f64) -> RawCounts {
    let tally = |ty: f64, y: f64, e: f64| {
        let triggered = sent * ty / y;
        let clicks = triggered * y;
        IntensityCounts {
            sent,
            triggered,
            clicks,
            errors: clicks * e,
        }
    };
    let vacuum_triggered = sent * p_post_vacuum;
    RawCounts {
        vacuum: IntensityCounts {
            sent,
            triggered: vacuum_triggered,
            clicks: vacuum_triggered * obs.y0,
            errors: vacuum_triggered * obs.y0 * 0.5,
        },
        decoy: tally(obs.ty_mu, obs.y_mu, obs.e_mu),
        signal: tally(obs.ty_mu_prime, obs.y_mu_prime, obs.e_mu_prime),
    }
}

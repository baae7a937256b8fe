//! Decoy-state bounds on the single-photon contribution and the final key rate.
//!
//! # Heralded source
//!
//! For intensities `0 < mu < mu'`, write `s = mu/(1+mu)` and `t = mu'/(1+mu')`.
//! The observed rescaled yields obey
//!
//! ```text
//! Y~_x = Y_0 d_A/(1+x) + sum_{n>=1} Y_n (1 - (1-eta_A)^n) x^n/(1+x)^(n+1)
//! ```
//!
//! Weighting the decoy constraint by `(1+mu) t^2` and the signal constraint by
//! `(1+mu') s^2` and subtracting leaves `Y_n` with coefficient
//! `(1-(1-eta_A)^n) s^2 t^2 (s^(n-2) - t^(n-2))`: zero for `n = 2` and negative
//! for every `n >= 3`. Dropping those terms and clearing denominators gives
//!
//! ```text
//! Y_1 >= [ (mu'/mu)(1+mu)^3 Y~_mu - (mu/mu')(1+mu')^3 Y~_mu'
//!          - Y_0 d_A ((mu'/mu)(1+mu)^2 - (mu/mu')(1+mu')^2) ] / [eta_A (mu' - mu)]
//! ```
//!
//! # Coherent source
//!
//! With `C_x = Q_x e^x = sum Y_n x^n / n!`, weighting by `mu'^2` and `mu^2` in the
//! same way gives
//!
//! ```text
//! Y_1 >= [mu'^2 C_mu - mu^2 C_mu' - Y_0 (mu'^2 - mu^2)] / [mu mu' (mu' - mu)]
//! ```

use serde::{Deserialize, Serialize};

use crate::channel::VACUUM_ERROR_RATE;
use crate::error::{Error, Result};
use crate::observables::{ObservedStatistics, WcsObservedStatistics};
use crate::source::{poisson_weight, thermal_weight_unchecked, trigger_probability};

/// Error-correction inefficiency used unless configured otherwise.
pub const DEFAULT_EC_INEFFICIENCY: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceKind {
    #[serde(rename = "HSPS")]
    Hsps,
    #[serde(rename = "WCS")]
    Wcs,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Hsps => "HSPS",
            SourceKind::Wcs => "WCS",
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "HSPS" => Ok(SourceKind::Hsps),
            "WCS" => Ok(SourceKind::Wcs),
            _ => Err(format!("unknown source kind `{s}`")),
        }
    }
}

/// Which of the two nonvacuum intensities a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pulse {
    Decoy,
    Signal,
}

/// A value forced into its valid range, remembering whether that happened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub clamped: bool,
}

impl Clamped {
    fn within(raw: f64, lo: f64, hi: f64) -> Self {
        if raw < lo {
            Clamped {
                value: lo,
                clamped: true,
            }
        } else if raw > hi {
            Clamped {
                value: hi,
                clamped: true,
            }
        } else {
            Clamped {
                value: raw,
                clamped: false,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityBounds {
    /// Lower bound on the single-photon yield.
    pub y1_lower: f64,
    /// Single-photon fraction of the signal-intensity clicks.
    pub delta1: f64,
    /// Upper bound on the single-photon QBER.
    pub e1_upper: f64,
    /// False when any of the three values had to be clamped.
    pub feasible: bool,
}

impl ObservedStatistics {
    pub fn intensity(&self, pulse: Pulse) -> f64 {
        match pulse {
            Pulse::Decoy => self.mu,
            Pulse::Signal => self.mu_prime,
        }
    }

    pub fn rescaled_yield(&self, pulse: Pulse) -> f64 {
        match pulse {
            Pulse::Decoy => self.ty_mu,
            Pulse::Signal => self.ty_mu_prime,
        }
    }

    pub fn qber(&self, pulse: Pulse) -> f64 {
        match pulse {
            Pulse::Decoy => self.e_mu,
            Pulse::Signal => self.e_mu_prime,
        }
    }
}

fn check_order(mu: f64, mu_prime: f64) -> Result<()> {
    if mu > 0.0 && mu < mu_prime && mu_prime.is_finite() {
        Ok(())
    } else {
        Err(Error::IntensityOrder { mu, mu_prime })
    }
}

fn check_efficiency(eta_a: f64) -> Result<()> {
    if eta_a > 0.0 && eta_a <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta_a",
            value: eta_a,
            reason: "trigger efficiency must lie in (0, 1]",
        })
    }
}

/// Forward value of the heralded-source yield constraint for a given yield
/// sequence `yields[n] = Y_n`.
pub fn synthesize_observables_from_yields(yields: &[f64], x: f64, eta_a: f64, d_a: f64) -> f64 {
    let Some((&y0, rest)) = yields.split_first() else {
        return 0.0;
    };
    let mut total = y0 * d_a / (1.0 + x);
    for (i, &y) in rest.iter().enumerate() {
        let n = i as u32 + 1;
        total += y * trigger_probability(n, eta_a) * thermal_weight_unchecked(n, x);
    }
    total
}

/// Forward value of the coherent-source gain `Q_x = sum Y_n e^(-x) x^n / n!`.
pub fn synthesize_wcs_gain_from_yields(yields: &[f64], x: f64) -> f64 {
    yields
        .iter()
        .enumerate()
        .map(|(n, &y)| y * poisson_weight(n as u32, x))
        .sum()
}

/// Coefficient of `Y_n` (`n >= 1`) left after weighting the decoy constraint
/// by `(1+mu)(mu'/(1+mu'))^2`, the signal constraint by `(1+mu')(mu/(1+mu))^2`,
/// and subtracting.
pub fn hsps_elimination_coefficient(n: u32, mu: f64, mu_prime: f64, eta_a: f64) -> f64 {
    let s = mu / (1.0 + mu);
    let t = mu_prime / (1.0 + mu_prime);
    let c = trigger_probability(n, eta_a);
    (1.0 + mu) * t * t * c * thermal_weight_unchecked(n, mu)
        - (1.0 + mu_prime) * s * s * c * thermal_weight_unchecked(n, mu_prime)
}

/// Coefficient of `Y_n` in `mu'^2 C_mu - mu^2 C_mu'`.
pub fn wcs_elimination_coefficient(n: u32, mu: f64, mu_prime: f64) -> f64 {
    let fact: f64 = (1..=n).map(f64::from).product();
    (mu_prime * mu_prime * mu.powi(n as i32) - mu * mu * mu_prime.powi(n as i32)) / fact
}

/// Lower bound on the single-photon yield of the heralded source.
pub fn y1_lower_bound_hsps(obs: &ObservedStatistics, eta_a: f64, d_a: f64) -> Result<Clamped> {
    let (mu, mu_p) = (obs.mu, obs.mu_prime);
    check_order(mu, mu_p)?;
    check_efficiency(eta_a)?;
    let up = mu_p / mu;
    let down = mu / mu_p;
    let numerator = up * (1.0 + mu).powi(3) * obs.ty_mu
        - down * (1.0 + mu_p).powi(3) * obs.ty_mu_prime
        - obs.y0 * d_a * (up * (1.0 + mu).powi(2) - down * (1.0 + mu_p).powi(2));
    Ok(Clamped::within(numerator / (eta_a * (mu_p - mu)), 0.0, 1.0))
}

/// Lower bound on the single-photon yield of the coherent source.
pub fn y1_lower_bound_wcs(y0: f64, q_mu: f64, q_mu_prime: f64, mu: f64, mu_prime: f64) -> Result<Clamped> {
    check_order(mu, mu_prime)?;
    let c_mu = q_mu * mu.exp();
    let c_mu_prime = q_mu_prime * mu_prime.exp();
    let mu2 = mu * mu;
    let mu_p2 = mu_prime * mu_prime;
    let numerator = mu_p2 * c_mu - mu2 * c_mu_prime - y0 * (mu_p2 - mu2);
    Ok(Clamped::within(numerator / (mu * mu_prime * (mu_prime - mu)), 0.0, 1.0))
}

/// Fraction of clicks at intensity `x` that came from single photons,
/// `Y_1 eta_A x / (Y~_x (1+x)^2)`.
pub fn single_photon_fraction(y1: f64, x: f64, rescaled_yield: f64, eta_a: f64) -> Result<Clamped> {
    let denom = rescaled_yield * (1.0 + x) * (1.0 + x);
    if denom <= 0.0 {
        return Err(Error::NoClicks);
    }
    Ok(Clamped::within(y1 * eta_a * x / denom, 0.0, 1.0))
}

/// Upper bound on the single-photon QBER from the statistics at `pulse`:
/// `[(1+x)^2 E_x Y~_x - (1+x) Y_0 d_A e_0] / (Y_1 eta_A x)`.
pub fn e1_upper_bound(obs: &ObservedStatistics, y1: f64, pulse: Pulse, eta_a: f64, d_a: f64) -> Result<Clamped> {
    if y1 <= 0.0 {
        return Err(Error::NoSinglePhotonYield);
    }
    check_efficiency(eta_a)?;
    let x = obs.intensity(pulse);
    let numerator =
        (1.0 + x).powi(2) * obs.qber(pulse) * obs.rescaled_yield(pulse) - (1.0 + x) * obs.y0 * d_a * VACUUM_ERROR_RATE;
    Ok(Clamped::within(numerator / (y1 * eta_a * x), 0.0, 0.5))
}

/// Upper bound on the coherent-source single-photon QBER,
/// `(E_mu Q_mu e^mu - e_0 Y_0) / (Y_1 mu)`.
pub fn e1_upper_bound_wcs(obs: &WcsObservedStatistics, y1: f64) -> Result<Clamped> {
    if y1 <= 0.0 {
        return Err(Error::NoSinglePhotonYield);
    }
    let numerator = obs.e_mu * obs.q_mu * obs.mu.exp() - VACUUM_ERROR_RATE * obs.y0;
    Ok(Clamped::within(numerator / (y1 * obs.mu), 0.0, 0.5))
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "probability must lie in [0, 1]",
        });
    }
    Ok(h2(p))
}

pub(crate) fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Key rate before clamping at zero.
pub fn raw_key_rate(detection_rate: f64, qber: f64, delta1: f64, e1: f64, f_ec: f64) -> f64 {
    0.5 * detection_rate * (-f_ec * h2(qber) + delta1 * (1.0 - h2(e1)))
}

/// Secure bits per pulse for the heralded source,
/// `(Y~_mu'/2) {-f H2(E_mu') + Delta_1(mu') [1 - H2(e_1)]}`, floored at zero.
pub fn key_rate_hsps(obs: &ObservedStatistics, bounds: &SecurityBounds, f_ec: f64) -> f64 {
    raw_key_rate(obs.ty_mu_prime, obs.e_mu_prime, bounds.delta1, bounds.e1_upper, f_ec).max(0.0)
}

/// Secure bits per pulse for the coherent source, with
/// `Delta_1 = Y_1 mu' e^(-mu') / Q_mu'`, floored at zero.
pub fn key_rate_wcs(q_mu_prime: f64, e_mu_prime: f64, y1: f64, e1: f64, mu_prime: f64, f_ec: f64) -> f64 {
    if q_mu_prime <= 0.0 {
        return 0.0;
    }
    let delta1 = (y1 * poisson_weight(1, mu_prime) / q_mu_prime).clamp(0.0, 1.0);
    raw_key_rate(q_mu_prime, e_mu_prime, delta1, e1, f_ec).max(0.0)
}

/// All three bounds for a heralded-source run, with `e_1` taken from the
/// statistics at `e1_from`. Infeasible arithmetic is clamped, never an error.
pub fn hsps_security_bounds(obs: &ObservedStatistics, eta_a: f64, d_a: f64, e1_from: Pulse) -> Result<SecurityBounds> {
    let y1 = y1_lower_bound_hsps(obs, eta_a, d_a)?;
    let delta1 = if obs.ty_mu_prime > 0.0 {
        single_photon_fraction(y1.value, obs.mu_prime, obs.ty_mu_prime, eta_a)?
    } else {
        Clamped {
            value: 0.0,
            clamped: true,
        }
    };
    let e1 = match e1_upper_bound(obs, y1.value, e1_from, eta_a, d_a) {
        Ok(e1) => e1,
        Err(Error::NoSinglePhotonYield) => Clamped {
            value: 0.5,
            clamped: true,
        },
        Err(e) => return Err(e),
    };
    Ok(SecurityBounds {
        y1_lower: y1.value,
        delta1: delta1.value,
        e1_upper: e1.value,
        feasible: !(y1.clamped || delta1.clamped || e1.clamped),
    })
}

pub fn wcs_security_bounds(obs: &WcsObservedStatistics) -> Result<SecurityBounds> {
    let y1 = y1_lower_bound_wcs(obs.y0, obs.q_mu, obs.q_mu_prime, obs.mu, obs.mu_prime)?;
    let delta1 = if obs.q_mu_prime > 0.0 {
        Clamped::within(y1.value * poisson_weight(1, obs.mu_prime) / obs.q_mu_prime, 0.0, 1.0)
    } else {
        Clamped {
            value: 0.0,
            clamped: true,
        }
    };
    let e1 = match e1_upper_bound_wcs(obs, y1.value) {
        Ok(e1) => e1,
        Err(Error::NoSinglePhotonYield) => Clamped {
            value: 0.5,
            clamped: true,
        },
        Err(e) => return Err(e),
    };
    Ok(SecurityBounds {
        y1_lower: y1.value,
        delta1: delta1.value,
        e1_upper: e1.value,
        feasible: !(y1.clamped || delta1.clamped || e1.clamped),
    })
}

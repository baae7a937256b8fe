//! Forecast -> bounds -> key rate for one parameter point.

use crate::bounds::{
    hsps_security_bounds, raw_key_rate, single_photon_fraction, wcs_security_bounds, Pulse, SecurityBounds,
    DEFAULT_EC_INEFFICIENCY,
};
use crate::channel::{n_photon_click_probability, n_photon_error_rate, ChannelParams};
use crate::error::Result;
use crate::observables::{
    forecast_observables, forecast_wcs_observables, simulate_qber, simulate_rescaled_yield, simulate_wcs_gain,
    simulate_wcs_qber,
};
use crate::source::{poisson_weight, HeraldedSourceParams};

/// Everything except the intensities and the distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Trigger-detector efficiency of the heralded source.
    pub eta_a: f64,
    /// Trigger-detector dark-count probability.
    pub d_a: f64,
    pub channel: ChannelParams,
    /// Error-correction inefficiency `f`.
    pub f_ec: f64,
    /// Intensity whose statistics bound the single-photon QBER.
    pub e1_from: Pulse,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            eta_a: 0.8,
            d_a: 1e-5,
            channel: ChannelParams::telecom_fiber(),
            f_ec: DEFAULT_EC_INEFFICIENCY,
            e1_from: Pulse::Decoy,
        }
    }
}

impl ProtocolParams {
    pub fn at_distance(&self, distance_km: f64) -> Self {
        Self {
            channel: self.channel.at_distance(distance_km),
            ..*self
        }
    }
}

/// The observed quantities reported alongside a key rate. For a coherent
/// source the "yields" are the gains `Q_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservablesSnapshot {
    pub y0: f64,
    pub y_mu: f64,
    pub y_mu_prime: f64,
    pub e_mu: f64,
    pub e_mu_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub observables: ObservablesSnapshot,
    pub bounds: SecurityBounds,
    /// Key rate before flooring at zero; negative when insecure.
    pub raw_rate: f64,
}

impl Evaluation {
    pub fn key_rate(&self) -> f64 {
        self.raw_rate.max(0.0)
    }
}

/// Three-intensity heralded-source protocol at `(mu, mu_prime)`.
pub fn evaluate_hsps(mu: f64, mu_prime: f64, params: &ProtocolParams) -> Result<Evaluation> {
    let obs = forecast_observables(mu, mu_prime, params.eta_a, params.d_a, &params.channel)?;
    let bounds = hsps_security_bounds(&obs, params.eta_a, params.d_a, params.e1_from)?;
    let raw_rate = raw_key_rate(
        obs.ty_mu_prime,
        obs.e_mu_prime,
        bounds.delta1,
        bounds.e1_upper,
        params.f_ec,
    );
    Ok(Evaluation {
        observables: ObservablesSnapshot {
            y0: obs.y0,
            y_mu: obs.y_mu,
            y_mu_prime: obs.y_mu_prime,
            e_mu: obs.e_mu,
            e_mu_prime: obs.e_mu_prime,
        },
        bounds,
        raw_rate,
    })
}

/// Three-intensity coherent-state protocol at `(mu, mu_prime)`.
pub fn evaluate_wcs(mu: f64, mu_prime: f64, params: &ProtocolParams) -> Result<Evaluation> {
    let obs = forecast_wcs_observables(mu, mu_prime, &params.channel)?;
    let bounds = wcs_security_bounds(&obs)?;
    let raw_rate = raw_key_rate(
        obs.q_mu_prime,
        obs.e_mu_prime,
        bounds.delta1,
        bounds.e1_upper,
        params.f_ec,
    );
    Ok(Evaluation {
        observables: ObservablesSnapshot {
            y0: obs.y0,
            y_mu: obs.q_mu,
            y_mu_prime: obs.q_mu_prime,
            e_mu: obs.e_mu,
            e_mu_prime: obs.e_mu_prime,
        },
        bounds,
        raw_rate,
    })
}

/// Single-photon fraction and QBER of heralded signal pulses when `Y_1` and
/// `e_1` are known exactly rather than bounded.
pub fn ideal_bounds_hsps(mu_prime: f64, eta_a: f64, d_a: f64, ch: &ChannelParams) -> Result<(f64, f64)> {
    let src = HeraldedSourceParams::new(mu_prime, eta_a, d_a)?;
    let y1 = n_photon_click_probability(1, ch);
    let ty = simulate_rescaled_yield(&src, ch);
    let delta1 = single_photon_fraction(y1, mu_prime, ty, eta_a)?.value;
    let e1 = n_photon_error_rate(1, ch)?;
    Ok((delta1, e1))
}

/// Benchmark key rate (before flooring) of the heralded source with exact
/// single-photon knowledge.
pub fn ideal_raw_rate_hsps(mu_prime: f64, params: &ProtocolParams) -> Result<f64> {
    let src = HeraldedSourceParams::new(mu_prime, params.eta_a, params.d_a)?;
    let (delta1, e1) = ideal_bounds_hsps(mu_prime, params.eta_a, params.d_a, &params.channel)?;
    let ty = simulate_rescaled_yield(&src, &params.channel);
    let e = simulate_qber(&src, &params.channel)?;
    Ok(raw_key_rate(ty, e, delta1, e1, params.f_ec))
}

/// Benchmark key rate (before flooring) of the coherent source with exact
/// single-photon knowledge.
pub fn ideal_raw_rate_wcs(mu_prime: f64, params: &ProtocolParams) -> Result<f64> {
    let ch = &params.channel;
    let q = simulate_wcs_gain(mu_prime, ch);
    let e = simulate_wcs_qber(mu_prime, ch)?;
    let delta1 = (n_photon_click_probability(1, ch) * poisson_weight(1, mu_prime) / q).clamp(0.0, 1.0);
    let e1 = n_photon_error_rate(1, ch)?;
    Ok(raw_key_rate(q, e, delta1, e1, params.f_ec))
}

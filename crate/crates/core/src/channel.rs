//! Fiber link plus Bob's receiver.

use crate::error::{check_nonnegative, check_unit_closed, check_unit_half_open, Error, Result};
use crate::source::trigger_probability;

/// Error rate of a click caused purely by a dark count.
pub const VACUUM_ERROR_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Fiber loss coefficient in dB/km.
    pub alpha_db_per_km: f64,
    /// Transmission distance in km.
    pub distance_km: f64,
    /// Transmittance and detection efficiency on Bob's side.
    pub eta_b: f64,
    /// Bob's dark-count probability per pulse.
    pub d_b: f64,
    /// Probability that a surviving photon hits the wrong detector.
    pub e_d: f64,
    /// Error rate of dark-count clicks.
    pub e_0: f64,
}

impl ChannelParams {
    pub fn new(alpha_db_per_km: f64, distance_km: f64, eta_b: f64, d_b: f64, e_d: f64) -> Result<Self> {
        let ch = Self {
            alpha_db_per_km,
            distance_km,
            eta_b,
            d_b,
            e_d,
            e_0: VACUUM_ERROR_RATE,
        };
        ch.validate()?;
        Ok(ch)
    }

    /// Standard telecom fiber with gated InGaAs detectors, at zero distance.
    pub fn telecom_fiber() -> Self {
        Self {
            alpha_db_per_km: 0.21,
            distance_km: 0.0,
            eta_b: 0.045,
            d_b: 1.7e-6,
            e_d: 0.033,
            e_0: VACUUM_ERROR_RATE,
        }
    }

    pub fn at_distance(self, distance_km: f64) -> Self {
        Self { distance_km, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_nonnegative("alpha_db_per_km", self.alpha_db_per_km)?;
        check_nonnegative("distance_km", self.distance_km)?;
        check_unit_closed("eta_b", self.eta_b)?;
        check_unit_half_open("d_b", self.d_b)?;
        if !(0.0..=0.5).contains(&self.e_d) {
            return Err(Error::InvalidParameter {
                name: "e_d",
                value: self.e_d,
                reason: "must lie in [0, 0.5]",
            });
        }
        if self.e_0 != VACUUM_ERROR_RATE {
            return Err(Error::InvalidParameter {
                name: "e_0",
                value: self.e_0,
                reason: "dark-count clicks are random; e_0 is fixed at 0.5",
            });
        }
        Ok(())
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::telecom_fiber()
    }
}

/// Fiber transmittance `10^(-alpha L / 10)`.
pub fn fiber_transmittance(alpha_db_per_km: f64, distance_km: f64) -> f64 {
    10f64.powf(-alpha_db_per_km * distance_km / 10.0)
}

/// End-to-end transmittance `eta = t_AB * eta_B`.
pub fn overall_transmittance(ch: &ChannelParams) -> f64 {
    fiber_transmittance(ch.alpha_db_per_km, ch.distance_km) * ch.eta_b
}

/// `d_B + 1 - (1 - eta)^n`, the additive click model, capped at 1.
pub fn n_photon_click_probability(n: u32, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    (ch.d_b + trigger_probability(n, eta)).min(1.0)
}

/// Error rate `e_n` of an `n`-photon state.
pub fn n_photon_error_rate(n: u32, ch: &ChannelParams) -> Result<f64> {
    let detected = trigger_probability(n, overall_transmittance(ch));
    let clicks = ch.d_b + detected;
    if clicks <= 0.0 {
        return Err(Error::NoClicks);
    }
    Ok((ch.e_0 * ch.d_b + ch.e_d * detected) / clicks)
}

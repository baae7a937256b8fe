//! Term-by-term photon-number sums.
//!
//! Every quantity the forecast evaluates in closed form has a truncated
//! series counterpart here. These are slow and only used to cross-check the
//! closed forms; nothing on the production path calls into this module.

use crate::channel::{overall_transmittance, ChannelParams};
use crate::source::{poisson_weight, thermal_weight_unchecked, HeraldedSourceParams};

/// Tail mass below which a geometric series is cut off.
pub const TAIL_TOLERANCE: f64 = 1e-15;

/// Hard cap on the number of photon-number terms.
pub const MAX_TERMS: u32 = 500;

/// Number of terms needed before the remaining thermal tail
/// `sum_{n>N} a_n(x) = (x / (1 + x))^(N + 1)` drops below [`TAIL_TOLERANCE`].
pub fn thermal_terms(x: f64) -> u32 {
    if x <= 0.0 {
        return 1;
    }
    let r = x / (1.0 + x);
    let mut tail = r;
    let mut n = 1;
    while n < MAX_TERMS {
        tail *= r;
        if tail < TAIL_TOLERANCE {
            break;
        }
        n += 1;
    }
    n
}

/// Number of Poisson terms needed before the tail drops below [`TAIL_TOLERANCE`].
pub fn poisson_terms(mu: f64) -> u32 {
    let mut n = 0;
    while n < MAX_TERMS {
        let w = poisson_weight(n + 1, mu);
        // once the term ratio mu/(k+1) is at most 1/2 the tail is bounded by 2w
        if (n + 2) as f64 >= 2.0 * mu && 2.0 * w < TAIL_TOLERANCE {
            break;
        }
        n += 1;
    }
    n
}

// `1 - (1 - eta)^n` written to keep full precision when `eta` is tiny
fn trigger(n: u32, eta: f64) -> f64 {
    -(n as f64 * (-eta).ln_1p()).exp_m1()
}

/// `head + sum_{n>=1} term(n)` where every term is `a_n(x)` times a factor in
/// `[0, 2]`. Stops once the remaining tail `2 (x/(1+x))^(N+1)` is below
/// [`TAIL_TOLERANCE`] both absolutely and relative to the partial sum, so small
/// sums keep their relative accuracy.
fn thermal_series(x: f64, head: f64, term: impl Fn(u32) -> f64) -> f64 {
    let r = x / (1.0 + x);
    let mut total = head;
    let mut tail = r;
    for n in 1..=MAX_TERMS {
        total += term(n);
        tail *= r;
        if 2.0 * tail <= TAIL_TOLERANCE * total.min(1.0) {
            break;
        }
    }
    total
}

/// `sum_{n>=0} term(n)` where every term is `P_mu(n)` times a factor in
/// `[0, 2]`, with the same stopping rule as [`thermal_series`].
fn poisson_series(mu: f64, term: impl Fn(u32) -> f64) -> f64 {
    let mut total = 0.0;
    for n in 0..=MAX_TERMS {
        total += term(n);
        // once the term ratio mu/(k+1) is at most 1/2 the tail is bounded by 2w
        let next = poisson_weight(n + 1, mu);
        if (n + 2) as f64 >= 2.0 * mu && 4.0 * next <= TAIL_TOLERANCE * total.min(1.0) {
            break;
        }
    }
    total
}

pub fn post_selection_probability(src: &HeraldedSourceParams) -> f64 {
    thermal_series(src.x, src.d_a / (1.0 + src.x), |n| {
        trigger(n, src.eta_a) * thermal_weight_unchecked(n, src.x)
    })
}

/// Rescaled yield with the additive click model `d_B + 1 - (1 - eta)^n`.
pub fn rescaled_yield(src: &HeraldedSourceParams, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    thermal_series(src.x, src.d_a * ch.d_b / (1.0 + src.x), |n| {
        trigger(n, src.eta_a) * thermal_weight_unchecked(n, src.x) * (ch.d_b + trigger(n, eta))
    })
}

/// Error mass `E_x * Y~_x`, summed from the per-photon-number error rates.
pub fn error_mass(src: &HeraldedSourceParams, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    thermal_series(src.x, ch.e_0 * src.d_a * ch.d_b / (1.0 + src.x), |n| {
        let weight = trigger(n, src.eta_a) * thermal_weight_unchecked(n, src.x);
        let clicks = ch.d_b + trigger(n, eta);
        let e_n = (ch.e_0 * ch.d_b + ch.e_d * trigger(n, eta)) / clicks;
        weight * clicks * e_n
    })
}

pub fn qber(src: &HeraldedSourceParams, ch: &ChannelParams) -> f64 {
    error_mass(src, ch) / rescaled_yield(src, ch)
}

pub fn wcs_gain(mu: f64, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    poisson_series(mu, |n| poisson_weight(n, mu) * (ch.d_b + trigger(n, eta)))
}

pub fn wcs_qber(mu: f64, ch: &ChannelParams) -> f64 {
    let eta = overall_transmittance(ch);
    let errors = poisson_series(mu, |n| {
        poisson_weight(n, mu) * (ch.e_0 * ch.d_b + ch.e_d * trigger(n, eta))
    });
    errors / wcs_gain(mu, ch)
}

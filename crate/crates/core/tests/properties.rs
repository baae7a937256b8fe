//! Randomized properties of the model and the bounds.

use proptest::prelude::*;

use hsps_decoy::bounds::{hsps_security_bounds, wcs_security_bounds, Pulse, SourceKind};
use hsps_decoy::channel::ChannelParams;
use hsps_decoy::observables::{
    forecast_observables, forecast_wcs_observables, simulate_rescaled_yield, simulate_yield,
};
use hsps_decoy::optimizer::{evaluate_point, SweepConfig};
use hsps_decoy::series;
use hsps_decoy::source::{post_selection_probability, triggered_distribution, HeraldedSourceParams};

fn channel() -> impl Strategy<Value = ChannelParams> {
    (0.15..0.3f64, 0.0..200.0f64, 0.01..=1.0f64, 1e-7..1e-4f64, 0.0..=0.1f64).prop_map(|(alpha, l, eta_b, d_b, e_d)| {
        ChannelParams {
            alpha_db_per_km: alpha,
            distance_km: l,
            eta_b,
            d_b,
            e_d,
            ..ChannelParams::telecom_fiber()
        }
    })
}

fn source() -> impl Strategy<Value = HeraldedSourceParams> {
    (1e-3..=1.0f64, 1e-3..=1.0f64, 0.0..=1e-3f64)
        .prop_map(|(x, eta_a, d_a)| HeraldedSourceParams::new(x, eta_a, d_a).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn triggered_distribution_is_normalized(src in source()) {
        let n_max = series::thermal_terms(src.x);
        let total: f64 = (0..=n_max).map(|n| triggered_distribution(n, &src).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum = {}", total);
    }

    #[test]
    fn closed_forms_match_series(src in source(), ch in channel()) {
        prop_assert!(rel(post_selection_probability(&src), series::post_selection_probability(&src)) < 1e-12);
        prop_assert!(rel(simulate_rescaled_yield(&src, &ch), series::rescaled_yield(&src, &ch)) < 1e-12);
        prop_assert!(rel(hsps_decoy::observables::simulate_qber(&src, &ch).unwrap(), series::qber(&src, &ch)) < 1e-12);
        prop_assert!(rel(hsps_decoy::observables::simulate_wcs_gain(src.x, &ch), series::wcs_gain(src.x, &ch)) < 1e-12);
    }

    #[test]
    fn rescaled_yield_is_yield_times_trigger(src in source(), ch in channel()) {
        let lhs = simulate_yield(&src, &ch).unwrap() * post_selection_probability(&src);
        prop_assert!(rel(lhs, simulate_rescaled_yield(&src, &ch)) < 1e-15 * 4.0);
    }

    #[test]
    fn clamp_discipline_hsps(
        (mu, mu_p) in (1e-3..0.5f64, 0.0..0.5f64).prop_map(|(m, d)| (m, m + d + 1e-3)),
        eta_a in 1e-2..=1.0f64,
        d_a in 0.0..=1e-3f64,
        ch in channel(),
    ) {
        let obs = forecast_observables(mu, mu_p, eta_a, d_a, &ch).unwrap();
        for pulse in [Pulse::Decoy, Pulse::Signal] {
            let b = hsps_security_bounds(&obs, eta_a, d_a, pulse).unwrap();
            prop_assert!((0.0..=1.0).contains(&b.y1_lower));
            prop_assert!((0.0..=1.0).contains(&b.delta1));
            prop_assert!((0.0..=0.5).contains(&b.e1_upper));
        }
    }

    #[test]
    fn clamp_discipline_wcs(
        (mu, mu_p) in (1e-3..0.5f64, 0.0..0.5f64).prop_map(|(m, d)| (m, m + d + 1e-3)),
        ch in channel(),
    ) {
        let obs = forecast_wcs_observables(mu, mu_p, &ch).unwrap();
        let b = wcs_security_bounds(&obs).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.y1_lower));
        prop_assert!((0.0..=1.0).contains(&b.delta1));
        prop_assert!((0.0..=0.5).contains(&b.e1_upper));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rate_never_exceeds_ideal(
        d in 0.0..200.0f64,
        mu in 0.01..0.2f64,
        eta_a in 0.3..=1.0f64,
        wcs in any::<bool>(),
    ) {
        let mut cfg = SweepConfig::default().with_mu(mu);
        cfg.protocol.eta_a = eta_a;
        let kind = if wcs { SourceKind::Wcs } else { SourceKind::Hsps };
        let p = evaluate_point(&cfg, kind, d).unwrap();
        let ideal = p.ideal_rate.unwrap();
        prop_assert!(p.key_rate >= 0.0);
        prop_assert!(p.key_rate <= ideal, "R = {} > ideal {}", p.key_rate, ideal);
        if p.key_rate > 0.0 {
            prop_assert!(p.bounds.feasible);
        }
    }
}

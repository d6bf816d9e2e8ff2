//! Property tests for the accounting algebra.

use odometer_core::boundaries::{crossing_probability, mixture_bound};
use odometer_core::filter::{filter_admits, filter_threshold, y_star, FilterConfig};
use odometer_core::spend::{CompositionState, PrivacySpend};
use proptest::prelude::*;

fn spend_strategy() -> impl Strategy<Value = PrivacySpend> {
    (0.0f64..2.0, 0.0f64..0.01).prop_map(|(eps, delta)| PrivacySpend::approx_dp(eps, delta).unwrap())
}

proptest! {
    #[test]
    fn folding_spends_is_grouping_free(spends in prop::collection::vec(spend_strategy(), 0..24), split in 0usize..24) {
        let all = CompositionState::from_spends(&spends).unwrap();
        let cut = split.min(spends.len());
        let left = CompositionState::from_spends(&spends[..cut]).unwrap();
        let mut resumed = left;
        for s in &spends[cut..] {
            resumed = resumed.append(s).unwrap();
        }
        // same totals whichever way the sequence is grouped
        prop_assert!((resumed.v() - all.v()).abs() <= 1e-9 * (1.0 + all.v()));
        prop_assert!((resumed.delta_sum() - all.delta_sum()).abs() <= 1e-12);
        prop_assert_eq!(resumed.n(), all.n());

        // and the sums match the direct formulas
        let v_direct: f64 = spends.iter().map(|s| s.epsilon * s.epsilon).sum();
        prop_assert!((all.v() - v_direct).abs() <= 1e-9 * (1.0 + v_direct));
    }

    #[test]
    fn threshold_is_increasing_and_concave(v in 0.0f64..50.0, dv in 1e-6f64..1.0, dp in 1e-9f64..0.5) {
        let f0 = filter_threshold(v, dp).unwrap();
        let f1 = filter_threshold(v + dv, dp).unwrap();
        let f2 = filter_threshold(v + 2.0 * dv, dp).unwrap();
        prop_assert!(f1 > f0);
        // concavity: second difference nonpositive
        prop_assert!(f2 - f1 <= f1 - f0 + 1e-9);
    }

    #[test]
    fn y_star_inverts_the_threshold(eps in 0.01f64..32.0, dp in 1e-9f64..0.5) {
        let y = y_star(eps, dp).unwrap();
        let back = filter_threshold(y, dp).unwrap();
        prop_assert!((back - eps).abs() <= 1e-9 * eps.max(1.0));
    }

    #[test]
    fn optimized_line_crosses_at_exactly_delta(y in 1e-6f64..100.0, delta in 1e-9f64..0.999) {
        let b = (2.0 * (1.0 / delta).ln() * y).sqrt();
        let p = crossing_probability(y, b).unwrap();
        prop_assert!((p - delta).abs() <= 1e-12 * delta.max(1e-9));
    }

    #[test]
    fn rejections_are_antitone(
        base_eps in 0.0f64..1.0,
        base_delta in 0.0f64..0.01,
        extra_eps in 0.0f64..1.0,
        extra_delta in 0.0f64..0.01,
        v0 in 0.0f64..0.2,
        budget in 0.1f64..2.0,
    ) {
        let cfg = FilterConfig::new(budget, 1e-6, 0.005).unwrap();
        let state = CompositionState::new()
            .append(&PrivacySpend::approx_dp(v0.sqrt(), 0.001).unwrap())
            .unwrap();
        let base = PrivacySpend::approx_dp(base_eps, base_delta).unwrap();
        if !filter_admits(&state, &base, &cfg).unwrap().admitted {
            let worse = PrivacySpend::approx_dp(
                base_eps + extra_eps,
                (base_delta + extra_delta).min(1.0),
            )
            .unwrap();
            prop_assert!(!filter_admits(&state, &worse, &cfg).unwrap().admitted);
        }
    }

    #[test]
    fn mixture_bound_monotone_in_delta_and_v(
        v in 0.0f64..50.0,
        rho in 1e-4f64..1.0,
        d_lo in 1e-8f64..0.4,
        bump in 1e-6f64..0.5,
    ) {
        let tight = mixture_bound(v, rho, d_lo).unwrap();
        let loose = mixture_bound(v, rho, d_lo + bump).unwrap();
        prop_assert!(loose < tight);
        let later = mixture_bound(v + 0.5, rho, d_lo).unwrap();
        prop_assert!(later > tight);
    }
}

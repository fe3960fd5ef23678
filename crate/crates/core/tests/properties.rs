use bubblestamp_core::dating::{datestamp, Tail};
use bubblestamp_core::dgp::simulate;
use bubblestamp_core::svadf::{recursive_path, stat_at};
use bubblestamp_core::{
    BubbleSpec, DgpSpec, LagSpec, PersistenceFilter, RecursiveConfig, ThresholdRule, Variant,
    VolSpec,
};
use proptest::prelude::*;

fn vol_strategy() -> impl Strategy<Value = VolSpec> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|s| VolSpec::homoskedastic().with_sigma0(s)),
        (0.0f64..1.5).prop_map(VolSpec::log_ar1),
        (0.0f64..0.2, 0.5f64..0.79).prop_map(|(a, b)| VolSpec::garch(a, b)),
    ]
}

/// Relative agreement at 1e-8 needs the bubble peak to stay within about
/// 1e6 noise units; beyond that both fits lose precision to conditioning.
const MAX_LOG_GROWTH: f64 = 13.8;

fn spec_strategy() -> impl Strategy<Value = DgpSpec> {
    (
        100usize..300,
        vol_strategy(),
        any::<u64>(),
        prop::option::of((0.1f64..0.5, 0.1f64..0.4, 0.2f64..2.0, 0.2f64..0.9)),
    )
        .prop_filter("bubble growth beyond 1e6-fold", |(n, _, _, bubble)| {
            bubble.is_none_or(|(_, len, c, a)| {
                let n = *n as f64;
                len * n * (c / n.powf(a)).ln_1p() <= MAX_LOG_GROWTH
            })
        })
        .prop_map(|(n, vol, seed, bubble)| {
            let bubble = bubble.map(|(r_e, len, c, a)| BubbleSpec::new(r_e, r_e + len, c, a).unwrap());
            DgpSpec {
                n,
                bubble,
                vol,
                x0: 0.0,
                seed,
            }
        })
}

/// Statistics near zero come from `delta_hat - 1` cancelling, so agreement
/// there is absolute.
const ABS_FLOOR: f64 = 1e-9;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= rel * a.abs().max(b.abs()) + ABS_FLOOR
}

fn cases() -> u32 {
    std::env::var("PROPTEST_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(cases()))]

    #[test]
    fn statistics_are_scale_invariant(spec in spec_strategy(), k in 1e-3f64..1e3) {
        let x = simulate(&spec).unwrap();
        let y = x.map_values(|v| v * k);
        for variant in [Variant::Coefficient, Variant::TType] {
            let cfg = RecursiveConfig::default().with_variant(variant);
            let a = recursive_path(&x, &cfg).unwrap();
            let b = recursive_path(&y, &cfg).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!(close(*u, *v, 1e-8), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn statistics_are_location_invariant(spec in spec_strategy(), shift in -1e3f64..1e3) {
        let x = simulate(&spec).unwrap();
        let y = x.map_values(|v| v + shift);
        for variant in [Variant::Coefficient, Variant::TType] {
            let cfg = RecursiveConfig::default().with_variant(variant);
            let a = recursive_path(&x, &cfg).unwrap();
            let b = recursive_path(&y, &cfg).unwrap();
            for (u, v) in a.values.iter().zip(&b.values) {
                prop_assert!(close(*u, *v, 1e-8), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn recursion_matches_batch_refits(spec in spec_strategy()) {
        let x = simulate(&spec).unwrap();
        for variant in [Variant::Coefficient, Variant::TType] {
            let p = recursive_path(&x, &RecursiveConfig::default().with_variant(variant)).unwrap();
            for i in 0..p.len() {
                let batch = stat_at(&x, p.tau_at(i), variant).unwrap();
                prop_assert!(close(p.values[i], batch, 1e-8));
            }
        }
    }

    #[test]
    fn raising_origination_threshold_never_dates_earlier(
        spec in spec_strategy(),
        lo in -2.0f64..2.0,
        bump in 0.0f64..3.0,
        above in 0usize..10,
        gap in 0usize..3,
    ) {
        let x = simulate(&spec).unwrap();
        let p = recursive_path(&x, &RecursiveConfig::default()).unwrap();
        let filter = PersistenceFilter { min_above: above, min_below: 0, consolidation_gap: gap };
        let coll = ThresholdRule::collapse_default();
        let low = datestamp(&p, &ThresholdRule::fixed(lo, Tail::Right), &coll, &filter).unwrap();
        let high = datestamp(&p, &ThresholdRule::fixed(lo + bump, Tail::Right), &coll, &filter).unwrap();
        if let Some(h) = high {
            let l = low.expect("a lower boundary is crossed whenever a higher one is");
            prop_assert!(l.r_e_hat <= h.r_e_hat);
        }
    }

    #[test]
    fn lowering_collapse_threshold_never_dates_earlier(
        spec in spec_strategy(),
        hi in -1.0f64..4.0,
        drop in 0.0f64..3.0,
        below in 0usize..10,
    ) {
        let x = simulate(&spec).unwrap();
        let p = recursive_path(&x, &RecursiveConfig::default()).unwrap();
        let filter = PersistenceFilter { min_above: 0, min_below: below, consolidation_gap: 0 };
        let orig = ThresholdRule::origination_default();
        let a = datestamp(&p, &orig, &ThresholdRule::fixed(hi, Tail::Left), &filter).unwrap();
        let b = datestamp(&p, &orig, &ThresholdRule::fixed(hi - drop, Tail::Left), &filter).unwrap();
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(a.r_e_hat, b.r_e_hat);
            let fa = a.r_f_hat.unwrap_or(f64::INFINITY);
            let fb = b.r_f_hat.unwrap_or(f64::INFINITY);
            prop_assert!(fb >= fa);
        }
    }

    #[test]
    fn lagged_paths_are_invariant_too(spec in spec_strategy(), k in 0.01f64..100.0) {
        let x = simulate(&spec).unwrap();
        let y = x.map_values(|v| 3.0 + v * k);
        let cfg = RecursiveConfig { lags: LagSpec::Fixed(2), ..RecursiveConfig::default() };
        let a = recursive_path(&x, &cfg).unwrap();
        let b = recursive_path(&y, &cfg).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!(close(*u, *v, 1e-7), "{u} vs {v}");
        }
    }
}

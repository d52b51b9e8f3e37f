mod common;

use proptest::prelude::*;
use sed_vlf::channel::{capacity_oracle, kl_divergence, regularize};
use sed_vlf::{ChannelSpec, Relabel};

fn regular_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.005f64..0.495, 0.0f64..1.0)
        .prop_map(|(p0, u)| (p0, p0 + u * (1.0 - 2.0 * p0)))
        .prop_filter("away from zero capacity", |(p0, p1)| (1.0 - p0 - p1).abs() > 0.02)
}

#[test]
fn closed_form_matches_oracle_on_random_pairs() {
    let mut rng = common::rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let spec = common::random_spec(&mut rng);
        let c = spec.stats().unwrap().c;
        worst = worst.max((c - capacity_oracle(&spec)).abs());
    }
    assert!(worst < 1e-9, "max deviation {worst:e}");
}

#[test]
fn zero_capacity_rejected() {
    assert!(matches!(ChannelSpec::new(0.3, 0.7), Err(sed_vlf::Error::ZeroCapacity { .. })));
    assert!(ChannelSpec::bsc(0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn constants_are_ordered((p0, p1) in regular_pair()) {
        let s = ChannelSpec::new(p0, p1).unwrap().stats().unwrap();
        prop_assert!(s.c <= s.c1 + 1e-12);
        prop_assert!(s.c1 <= s.c2 + 1e-12);
        prop_assert!(s.lambda > 0.0 && s.lambda <= 1.0);
        prop_assert!((s.pi0_star + s.pi1_star - 1.0).abs() < 1e-12);
        prop_assert!((s.lambda1 - (-s.c2).exp2()).abs() < 1e-12);
    }

    #[test]
    fn c1_is_the_larger_divergence((p0, p1) in regular_pair()) {
        let spec = ChannelSpec::new(p0, p1).unwrap();
        let (p, q) = (spec.output_dist(0), spec.output_dist(1));
        let s = spec.stats().unwrap();
        prop_assert!((s.c1 - kl_divergence(q, p)).abs() < 1e-12);
        prop_assert!(kl_divergence(q, p) >= kl_divergence(p, q) - 1e-12);
    }

    #[test]
    fn bsc_c1_is_scaled_c2(p in 0.001f64..0.499) {
        let s = ChannelSpec::bsc(p).unwrap().stats().unwrap();
        prop_assert!((s.c1 - (1.0 - 2.0 * p) * s.c2).abs() <= 1e-12 * s.c2.max(1.0));
        prop_assert_eq!(s.pi0_star, 0.5);
    }

    #[test]
    fn relabeling_preserves_capacity(
        (p0, p1) in regular_pair(),
        which in prop::sample::select(Relabel::ALL.to_vec()),
    ) {
        let (a, b) = which.apply(p0, p1);
        let spec = regularize(a, b).unwrap();
        prop_assert!((spec.p0() - p0).abs() < 1e-15 && (spec.p1() - p1).abs() < 1e-15);
        let (oa, ob) = spec.original();
        prop_assert!((oa - a).abs() < 1e-15 && (ob - b).abs() < 1e-15);
        let c = ChannelSpec::new(p0, p1).unwrap().stats().unwrap().c;
        prop_assert!((spec.stats().unwrap().c - c).abs() < 1e-12);
    }

    #[test]
    fn relabels_are_involutions(p0 in 0.01f64..0.99, p1 in 0.01f64..0.99) {
        for r in Relabel::ALL {
            let (a, b) = r.apply(p0, p1);
            let (c, d) = r.apply(a, b);
            prop_assert!((c - p0).abs() < 1e-15 && (d - p1).abs() < 1e-15);
        }
    }
}

use ggbm_core::bounds::{bound_pair, lower_bound, BoundParams};
use ggbm_core::geometry::{combine, Body, Direction};
use ggbm_core::measure::{mu, QuadratureSpec};
use ggbm_core::verify::{bm_deficit, counterexample_search, random_polygon, CounterexampleGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bp(n: usize, p: f64) -> BoundParams {
    BoundParams::new(n, p).unwrap()
}

fn polygon(seed: u64) -> Body {
    Body::Polygon(random_polygon(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn scaled(body: &Body, f: f64) -> Body {
    match body {
        Body::Polygon(p) => Body::polygon(p.vertices().iter().map(|v| [v[0] * f, v[1] * f]).collect()).unwrap(),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_ordered(n in 2usize..400, p in 1.0f64..50.0) {
        let b = bound_pair(bp(n, p)).unwrap();
        prop_assert!(b.lower >= 0.0);
        prop_assert!(b.lower <= b.upper + 1e-12, "{b:?}");
        prop_assert!(b.upper <= 1.0 / n as f64 + 1e-12, "{b:?}");
    }

    #[test]
    fn measure_is_a_probability(seed in any::<u64>(), p in 1.0f64..4.0) {
        let m = mu(&polygon(seed), bp(2, p), &QuadratureSpec::for_dim(2)).unwrap();
        prop_assert!(m.abs_error >= 0.0);
        prop_assert!(m.value >= 0.0 && m.value <= 1.0 + m.abs_error);
    }

    #[test]
    fn measure_is_monotone(seed in any::<u64>(), f in 1.0f64..2.0, p in 1.0f64..4.0) {
        let k = polygon(seed);
        let l = scaled(&k, f);
        let spec = QuadratureSpec::for_dim(2);
        let (a, b) = (mu(&k, bp(2, p), &spec).unwrap(), mu(&l, bp(2, p), &spec).unwrap());
        prop_assert!(a.value <= b.value + a.abs_error + b.abs_error);
    }

    #[test]
    fn measure_is_rotation_invariant(seed in any::<u64>(), angle in 0.0f64..6.3) {
        let Body::Polygon(k) = polygon(seed) else { unreachable!() };
        let spec = QuadratureSpec::for_dim(2);
        let a = mu(&Body::Polygon(k.clone()), bp(2, 2.0), &spec).unwrap();
        let b = mu(&Body::Polygon(k.rotated(angle).unwrap()), bp(2, 2.0), &spec).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.abs_error + b.abs_error + 1e-13);
    }

    #[test]
    fn combination_radial_is_superadditive(s1 in any::<u64>(), s2 in any::<u64>(), lambda in 0.0f64..1.0, t in 0.0f64..6.3) {
        let (k, l) = (polygon(s1), polygon(s2));
        let c = combine(lambda, &k, &l).unwrap();
        let th = Direction::from_angle(t);
        let lin = lambda * k.radial(&th).unwrap() + (1.0 - lambda) * l.radial(&th).unwrap();
        prop_assert!(c.radial(&th).unwrap() >= lin * (1.0 - 1e-12));
    }

    #[test]
    fn log_concavity_floor(seed in any::<u64>(), p in prop::sample::select(vec![1.5, 2.0, 3.0]), lambda in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let (k, l) = (polygon(seed), polygon(seed.wrapping_add(1)));
        let r = bm_deficit(&k, &l, lambda, 1e-6, bp(2, p), &QuadratureSpec::for_dim(2)).unwrap();
        prop_assert!(r.deficit >= -5.0 * r.numeric_error, "{} vs {}", r.deficit, r.numeric_error);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn no_witness_below_lower_bound(p in prop::sample::select(vec![1.5, 2.0, 3.0]), frac in 0.2f64..1.0) {
        let params = bp(2, p);
        let q = frac * lower_bound(params).unwrap();
        prop_assert!(counterexample_search(params, q, &CounterexampleGrid::default()).unwrap().is_none());
    }
}

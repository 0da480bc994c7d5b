use avgop_core::calculus::ogura_yamada;
use avgop_core::catalog;
use avgop_core::dynamics::{classify_limit, orbit};
use avgop_core::estimator::{estimate_modulus, falsify_averaged};
use avgop_core::linalg::spectral_norm;
use avgop_core::{
    exact_modulus, matrix_modulus, ConvexFunction, ConvexSet, Matrix, Operator, Vector,
};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
    (prop::collection::vec(-1.0..1.0f64, n * n), 0.05..1.0f64).prop_filter_map(
        "nonzero matrix",
        move |(entries, scale)| {
            let m = Matrix::from_row_slice(n, n, &entries);
            let norm = spectral_norm(&m);
            (norm > 1e-3).then(|| m * (scale / norm))
        },
    )
}

fn nonexpansive_pair() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..=4).prop_flat_map(|n| (matrix(n), matrix(n)))
}

fn point(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0..10.0f64, n).prop_map(Vector::from_vec)
}

fn convex_set() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (point(3), 0.1..5.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
        (point(3), prop::collection::vec(0.0..4.0f64, 3)).prop_map(|(lo, w)| {
            let hi = &lo + Vector::from_vec(w);
            ConvexSet::boxed(lo, hi).unwrap()
        }),
        (point(3), -3.0..3.0f64)
            .prop_filter("nonzero normal", |(n, _)| n.norm() > 1e-2)
            .prop_map(|(n, b)| ConvexSet::halfspace(n, b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relaxation_scales_the_modulus_linearly((m, _) in nonexpansive_pair(), i in 1usize..=9) {
        let lambda = i as f64 / 10.0;
        let n = m.nrows();
        let relaxed = Matrix::identity(n, n) * (1.0 - lambda) + &m * lambda;
        let k = matrix_modulus(&m).unwrap();
        prop_assert!((matrix_modulus(&relaxed).unwrap() - lambda * k).abs() <= 1e-9);
    }

    #[test]
    fn composition_respects_the_combined_bound((a, b) in nonexpansive_pair()) {
        let (ka, kb) = (matrix_modulus(&a).unwrap(), matrix_modulus(&b).unwrap());
        prop_assert!(matrix_modulus(&(&a * &b)).unwrap() <= ogura_yamada(ka, kb) + 1e-9);
    }

    #[test]
    fn modulus_is_convex_along_segments((a, b) in nonexpansive_pair(), lambda in 0.0..1.0f64) {
        let (ka, kb) = (matrix_modulus(&a).unwrap(), matrix_modulus(&b).unwrap());
        let mixed = &a * lambda + &b * (1.0 - lambda);
        prop_assert!(matrix_modulus(&mixed).unwrap() <= lambda * ka + (1.0 - lambda) * kb + 1e-9);
    }

    #[test]
    fn sampled_modulus_never_exceeds_the_exact_one((m, _) in nonexpansive_pair(), seed in 0u64..1000) {
        let t = Operator::linear(m.clone()).unwrap();
        let est = estimate_modulus(&t, 500, seed, 10).unwrap();
        prop_assert!(est.value <= matrix_modulus(&m).unwrap() + 1e-9);
    }

    #[test]
    fn shifting_keeps_the_derived_modulus((m, _) in nonexpansive_pair(), s in -5.0..5.0f64) {
        let n = m.nrows();
        let t = Operator::linear(m).unwrap();
        let shifted = Operator::compose(vec![Operator::shift(Vector::from_element(n, s)).unwrap(), t.clone()]).unwrap();
        prop_assert_eq!(exact_modulus(&shifted).value(), exact_modulus(&t).value());
    }

    #[test]
    fn projections_are_idempotent(c in convex_set(), x in point(3)) {
        let p = c.project(&x).unwrap();
        let pp = c.project(&p).unwrap();
        prop_assert!((&pp - &p).norm() <= 1e-12 * (1.0 + p.norm()));
    }

    #[test]
    fn projections_are_firmly_nonexpansive(c in convex_set(), x in point(3), y in point(3)) {
        let (px, py) = (c.project(&x).unwrap(), c.project(&y).unwrap());
        let d = &px - &py;
        prop_assert!(d.norm_squared() <= (&x - &y).dot(&d) + 1e-9);
    }

    #[test]
    fn huber_prox_is_firmly_nonexpansive(mu in 0.1..3.0f64, alpha in 0.1..3.0f64, x in point(3), y in point(3)) {
        let f = ConvexFunction::huber(3, mu, alpha).unwrap();
        let (px, py) = (f.prox(&x).unwrap(), f.prox(&y).unwrap());
        let d = &px - &py;
        prop_assert!(d.norm_squared() <= (&x - &y).dot(&d) + 1e-9);
    }

    #[test]
    fn falsifier_is_silent_on_projections(c in convex_set(), seed in 0u64..1000) {
        prop_assert!(falsify_averaged(&Operator::projection(c), 0.5, 300, seed).unwrap().is_none());
    }

    #[test]
    fn orbits_of_averaged_maps_are_fejer_monotone(c in convex_set(), x in point(3), lambda in 0.1..0.9f64) {
        // Fix T = C for the relaxed projection, so distances to any point of C never grow.
        let t = Operator::relaxation(lambda, Operator::projection(c.clone())).unwrap();
        let anchor = c.project(&Vector::zeros(3)).unwrap();
        let o = orbit(&t, &x, 1e-10, 2000).unwrap();
        for w in o.points.windows(2) {
            prop_assert!((&w[1] - &anchor).norm() <= (&w[0] - &anchor).norm() + 1e-9);
        }
    }

    #[test]
    fn identical_seeds_reproduce_estimates((m, _) in nonexpansive_pair(), seed in 0u64..1000) {
        let t = Operator::linear(m).unwrap();
        prop_assert_eq!(estimate_modulus(&t, 300, seed, 5).unwrap(), estimate_modulus(&t, 300, seed, 5).unwrap());
    }
}

#[test]
fn limit_verdicts_are_stable_across_seeds() {
    for seed in 0..5 {
        let dr = classify_limit(
            &catalog::dr_line_slab(),
            &catalog::dr_fixed_segment(),
            &[],
            200,
            seed,
            1e-10,
        )
        .unwrap();
        assert_eq!(dr.verdict.as_str(), "not_projection", "seed {seed}");
        let clamp = classify_limit(&catalog::averaged_clamp(), &catalog::unit_interval(), &[], 200, seed, 1e-10).unwrap();
        assert_eq!(clamp.verdict.as_str(), "projection", "seed {seed}");
    }
}

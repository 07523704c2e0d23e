use csmds::baselines::run_smacof;
use csmds::data::euclidean_target;
use csmds::eval::knn_predict;
use csmds::{
    config_for_variant, raw_stress, run_csmds, ConfigOverrides, CoordinateSearch, Variant,
};
use ndarray::Array2;
use proptest::prelude::*;

fn points(n: usize, l: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(-3.0f64..3.0, n * l)
        .prop_map(move |v| Array2::from_shape_vec((n, l), v).unwrap())
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::FullSearch),
        Just(Variant::Randomized),
        Just(Variant::Bootstrapped)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn csmds_never_increases_stress(pts in points(12, 3), v in variant(), seed in 0u64..1000) {
        let t = euclidean_target(pts.view()).unwrap();
        let cfg = config_for_variant(v, 2, &ConfigOverrides { seed: Some(seed), ..Default::default() }).unwrap();
        let run = run_csmds(&t, cfg).unwrap();
        let mut prev = run.initial_stress;
        for r in &run.trace {
            prop_assert!(r.stress <= prev);
            prev = r.stress;
        }
        let full = raw_stress(&t, run.embedding.distances()).unwrap();
        prop_assert!((full - run.stress).abs() <= 1e-9 * full.max(1e-12));
        prop_assert!(run.converged);
    }

    #[test]
    fn csmds_is_deterministic(pts in points(10, 2), v in variant(), seed in 0u64..1000) {
        let t = euclidean_target(pts.view()).unwrap();
        let cfg = config_for_variant(v, 2, &ConfigOverrides { seed: Some(seed), ..Default::default() }).unwrap();
        let a = run_csmds(&t, cfg.clone()).unwrap();
        let b = run_csmds(&t, cfg).unwrap();
        prop_assert_eq!(a.embedding.coords(), b.embedding.coords());
        prop_assert_eq!(a.evals, b.evals);
    }

    #[test]
    fn stepping_matches_run(pts in points(9, 3), seed in 0u64..1000) {
        let t = euclidean_target(pts.view()).unwrap();
        let cfg = config_for_variant(Variant::Bootstrapped, 2, &ConfigOverrides { seed: Some(seed), ..Default::default() }).unwrap();
        let whole = run_csmds(&t, cfg.clone()).unwrap();
        let mut cs = CoordinateSearch::new(&t, cfg).unwrap();
        while cs.start_epoch() {
            cs.run_epoch().unwrap();
        }
        let stepped = cs.finish();
        prop_assert_eq!(whole.embedding.coords(), stepped.embedding.coords());
        prop_assert_eq!(whole.trace.len(), stepped.trace.len());
    }

    #[test]
    fn smacof_trace_is_monotone(pts in points(15, 3), seed in 0u64..1000) {
        let t = euclidean_target(pts.view()).unwrap();
        let run = run_smacof(&t, 2, 1e-6, 100, seed).unwrap();
        let mut prev = f64::INFINITY;
        for r in &run.trace {
            prop_assert!(r.stress <= prev + 1e-10);
            prev = r.stress;
        }
    }

    #[test]
    fn knn_ignores_training_order(
        pts in points(20, 2),
        labels in proptest::collection::vec(0u32..3, 20),
        query in proptest::collection::vec(-3.0f64..3.0, 2),
        k in 1usize..8,
        perm_seed in 0u64..100,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let q = ndarray::Array1::from(query);
        let base = knn_predict(pts.view(), &labels, q.view(), k).unwrap();
        let mut order: Vec<usize> = (0..20).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let shuffled = pts.select(ndarray::Axis(0), &order);
        let shuffled_labels: Vec<u32> = order.iter().map(|&i| labels[i]).collect();
        // Exact distance ties can legitimately change the neighbor set.
        let mut d: Vec<f64> = pts.rows().into_iter()
            .map(|r| r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        d.sort_by(f64::total_cmp);
        prop_assume!(d.windows(2).all(|w| w[0] != w[1]));
        prop_assert_eq!(base, knn_predict(shuffled.view(), &shuffled_labels, q.view(), k).unwrap());
    }
}

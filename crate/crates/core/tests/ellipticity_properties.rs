use hn_core::ellipticity::{
    alpha_bound, alpha_p, key_ratio, lt_ratio, run_sweep, trace_check, trace_lower_bound,
    ConeSampler, SweepKind,
};
use hn_core::operator::lambda_from_eta;
use hn_core::symfun::in_gamma;
use hn_core::{OperatorSpec, Spectrum};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn samples_lie_in_the_cone(n in 2usize..=7, k in 1usize..=7, seed: u64, i in 0u64..1_000_000, scale in 0.01f64..100.0) {
        prop_assume!(k <= n);
        let s = ConeSampler::new(n, k, seed, scale).unwrap();
        prop_assert!(in_gamma(&s.sample_at(i), k).unwrap());
    }

    #[test]
    fn lemma_quantities_hold(n in 3usize..=6, k in 2usize..=5, l in 1usize..=4, seed: u64) {
        prop_assume!(l < k && k < n);
        let s = ConeSampler::new(n, k + 1, seed, 1.0).unwrap();
        for i in 0..20 {
            let eta = s.sample_at(i);
            let r = lt_ratio(&eta, k).unwrap();
            prop_assert!(r > 0.0 && r <= 1.0);
            let bound = alpha_bound(n, k, l);
            for p in 0..n {
                let a = alpha_p(&eta, k, l, p).unwrap();
                prop_assert!(a > 0.0 && a <= bound + 1e-12, "alpha_{} = {} > {}", p, a, bound);
            }
            let lambda = lambda_from_eta(&eta).unwrap();
            for op in [OperatorSpec::pure(n, k).unwrap(), OperatorSpec::quotient(n, k, l).unwrap()] {
                let q = key_ratio(&lambda, &op).unwrap();
                prop_assert!(q > 0.0 && q <= 1.0 / n as f64 + 1e-15);
                let q10 = key_ratio(&lambda.scaled(10.0), &op).unwrap();
                prop_assert!((q - q10).abs() < 1e-12);
            }
            prop_assert!(trace_check(&lambda, &OperatorSpec::pure(n, k).unwrap()).unwrap());
        }
    }
}

#[test]
fn stream_is_replayable() {
    let mut a = ConeSampler::new(3, 2, 42, 1.0).unwrap();
    let b = ConeSampler::new(3, 2, 42, 1.0).unwrap();
    for i in 0..100 {
        assert_eq!(a.position(), i);
        let x = a.sample_eta();
        assert_eq!(x.as_slice(), b.sample_at(i).as_slice());
    }
    let c = ConeSampler::new(3, 2, 43, 1.0).unwrap();
    assert_ne!(c.sample_at(0).as_slice(), b.sample_at(0).as_slice());
}

#[test]
fn uniform_points_attain_the_bounds() {
    let eta = Spectrum::uniform(3, 2.0).unwrap();
    assert!((alpha_p(&eta, 2, 1, 0).unwrap() - 0.25).abs() < 1e-12);
    assert!((trace_lower_bound(3, 2) - 12f64.sqrt()).abs() < 1e-12);
    for n in 2..=6 {
        for k in 1..n {
            let op = OperatorSpec::pure(n, k).unwrap();
            let lambda = Spectrum::uniform(n, 0.7).unwrap();
            let f = hn_core::operator::f_grad(&lambda, &op).unwrap();
            let total: f64 = f.as_slice().iter().sum();
            assert!((total - trace_lower_bound(n, k)).abs() < 1e-12 * total, "n={n} k={k}");
            assert!((lt_ratio(&Spectrum::uniform(n, 1.5).unwrap(), k).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        }
    }
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_sweep(SweepKind::AlphaBound, 5, 3, Some(2), 5000, 9).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.csv_row(), b.csv_row());
    assert_eq!(a.violations, 0);
    assert!(a.max_ratio <= alpha_bound(5, 3, 2) + 1e-12);
}

#[test]
fn default_configuration_count() {
    let rows: usize = SweepKind::ALL
        .iter()
        .map(|k| (2..=6).map(|n| k.index_sets(n).len()).sum::<usize>())
        .sum();
    assert_eq!(rows, 90);
}

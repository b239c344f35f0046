use anosov_core::ergodic::{birkhoff_average, ergodicity_test, standard_observables, ErgodicityConfig, Observable};
use anosov_core::{analyze, ShearMap, SmoothEndo, TorusPoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sheared(eps: f64) -> SmoothEndo<2> {
    let base = analyze([[3, 1], [1, 1]]).unwrap();
    if eps == 0.0 {
        SmoothEndo::linear(base)
    } else {
        SmoothEndo::new(base, vec![ShearMap::new(0, 1, eps, 1, 0.0)]).unwrap()
    }
}

fn observable() -> impl Strategy<Value = Observable<2>> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(Observable::Constant),
        prop::array::uniform2(-3i64..=3).prop_map(Observable::Cos),
        prop::array::uniform2(-3i64..=3).prop_map(Observable::Sin),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn averages_stay_in_range(
        eps in prop_oneof![Just(0.0), 0.0f64..0.05],
        phi in observable(),
        x in prop::array::uniform2(0.0f64..1.0),
        n in 1usize..2000,
    ) {
        let avg = birkhoff_average(&sheared(eps), &phi, &TorusPoint::new(x), n).unwrap();
        let (lo, hi) = phi.bounds();
        prop_assert!(avg >= lo - 1e-12 && avg <= hi + 1e-12);
        if n == 1 {
            prop_assert!((avg - phi.eval(&x)).abs() < 1e-9);
        }
    }
}

#[test]
fn linear_character_averages_shrink() {
    let f = sheared(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let starts: Vec<TorusPoint<2>> = (0..100).map(|_| TorusPoint::new([rng.random(), rng.random()])).collect();
    for phi in standard_observables() {
        for n in [1_000usize, 10_000, 100_000] {
            let bound = 10.0 / (n as f64).sqrt();
            for x in &starts {
                let avg = birkhoff_average(&f, &phi, x, n).unwrap();
                assert!(avg.abs() < bound, "{} n {n}: {avg}", phi.label());
            }
        }
    }
}

#[test]
fn ergodicity_report_is_reproducible() {
    let cfg = ErgodicityConfig { starts: 10, steps: 5_000, seed: 4, scaling_steps: vec![50, 500, 5_000], ..Default::default() };
    let f = sheared(0.03);
    let a = ergodicity_test(&f, &standard_observables(), &cfg).unwrap();
    let b = ergodicity_test(&f, &standard_observables(), &cfg).unwrap();
    assert_eq!(a, b);
    let mut ca = Vec::new();
    a.write_csv(&mut ca).unwrap();
    let text = String::from_utf8(ca).unwrap();
    assert_eq!(text.lines().next(), Some("observable,start,average"));
    assert_eq!(text.lines().count(), 1 + 3 * 10);
}

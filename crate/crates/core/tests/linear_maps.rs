use anosov_core::linalg;
use anosov_core::linear::preimages_linear;
use anosov_core::torus::torus_distance;
use anosov_core::{analyze, LinearEndo, TorusPoint};
use proptest::prelude::*;

fn hyperbolic_2x2() -> impl Strategy<Value = LinearEndo<2>> {
    prop::array::uniform4(-4i64..=4)
        .prop_filter_map("not an accepted hyperbolic matrix", |m| analyze([[m[0], m[1]], [m[2], m[3]]]).ok())
        .prop_filter("keep degrees small", |a| a.degree() <= 12)
}

fn point2() -> impl Strategy<Value = TorusPoint<2>> {
    prop::array::uniform2(0.0f64..1.0).prop_map(TorusPoint::new)
}

/// `log |A^k v| / k` after the direction of `A^k v` has settled, with
/// renormalisation at every step.
fn power_iteration_rate<const N: usize>(a: &LinearEndo<N>, steps: usize) -> f64 {
    let mut v = [1.0; N];
    v[0] = 0.37;
    for _ in 0..200 {
        v = linalg::normalize(&a.apply_vector(&v)).0;
    }
    let mut total = 0.0;
    for _ in 0..steps {
        let (u, n) = linalg::normalize(&a.apply_vector(&v));
        total += n.ln();
        v = u;
    }
    total / steps as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn splitting_is_invariant(a in hyperbolic_2x2()) {
        let mu = a.unstable_eigenvalue().unwrap();
        let u = *a.e_u().unwrap().vector();
        let au = a.apply_vector(&u);
        let scale = linalg::op_norm(a.matrix_f64());
        prop_assert!(linalg::norm(&linalg::sub(&au, &linalg::scale(&u, mu))) < 1e-12 * scale);
        let s = *a.e_s().unwrap().vector();
        let as_ = a.apply_vector(&s);
        // A E^s lies in E^s: no component across it
        prop_assert!((as_[0] * s[1] - as_[1] * s[0]).abs() < 1e-12 * scale);
    }

    #[test]
    fn linear_preimages(a in hyperbolic_2x2(), x in point2()) {
        let pre = preimages_linear(&a, &x);
        prop_assert_eq!(pre.len(), a.det().unsigned_abs() as usize);
        for (i, y) in pre.iter().enumerate() {
            prop_assert!(torus_distance(&a.apply(y), &x) < 1e-12);
            for z in &pre[i + 1..] {
                prop_assert!(torus_distance(y, z) > 0.0);
            }
        }
    }

    #[test]
    fn lambda_u_matches_power_iteration(a in hyperbolic_2x2()) {
        let rate = power_iteration_rate(&a, 10_000);
        prop_assert!((rate - a.lambda_u()).abs() < 1e-9, "{} vs {}", rate, a.lambda_u());
    }
}

#[test]
fn three_dimensional_rates() {
    for m in [[[0, -1, 0], [-1, 2, 2], [0, 2, 2]], [[2, 1, 0], [1, 2, 1], [0, 1, 2]]] {
        let a = analyze(m).unwrap();
        let rate = power_iteration_rate(&a, 10_000);
        assert!((rate - a.lambda_u()).abs() < 1e-9, "{m:?}: {rate} vs {}", a.lambda_u());
        let x = TorusPoint::new([0.1, 0.52, 0.93]);
        let pre = preimages_linear(&a, &x);
        assert_eq!(pre.len(), a.degree());
        assert!(pre.iter().all(|y| torus_distance(&a.apply(y), &x) < 1e-12));
    }
}

#[test]
fn reference_matrix_oracles() {
    // characteristic polynomial t^2 - 4t + 2
    let a = analyze([[3, 1], [1, 1]]).unwrap();
    assert_eq!(a.det(), 2);
    assert_eq!(a.degree(), 2);
    let mu = a.unstable_eigenvalue().unwrap();
    assert!((mu * mu - 4.0 * mu + 2.0).abs() < 1e-12);
    assert!((a.lambda_u() - 1.2279471772995156).abs() < 1e-14);
    assert!((a.stable_eigenvalue().unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-14);
}

use lqg_core::boundary::boundary_kpz_inverse;
use lqg_core::kpz::{brownian_table, kpz_forward, kpz_inverse, KpzParams};
use lqg_core::passage::{ldp_optimum, PassageProblem};
use proptest::prelude::*;

#[test]
fn brownian_intersection_exponents_at_pure_gravity() {
    let g = (8.0f64 / 3.0).sqrt();
    for (l, x, d) in brownian_table(&[1, 2, 3, 4, 5, 6]) {
        let got = kpz_inverse(x, g).unwrap();
        assert!((got - d).abs() <= 1e-12, "L = {l}: {got} vs {d}");
        assert!((d - (l as f64 - 0.5) / 2.0).abs() < 1e-15);
    }
}

#[test]
fn q_and_drift() {
    let p = KpzParams::new(1.0).unwrap();
    assert!((p.q - 2.5).abs() < 1e-15);
    assert!((p.a - 1.5).abs() < 1e-15);
    let p = KpzParams::new((8.0f64 / 3.0).sqrt()).unwrap();
    assert!((p.q - 5.0 / 6.0f64.sqrt()).abs() < 1e-14);
}

proptest! {
    #[test]
    fn round_trip(gamma in 0.0f64..1.999, x in 0.0f64..10.0) {
        let d = kpz_inverse(x, gamma).unwrap();
        prop_assert!((kpz_forward(d, gamma).unwrap() - x).abs() <= 1e-12 * (1.0 + x));
        let back = kpz_inverse(kpz_forward(x, gamma).unwrap(), gamma).unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * (1.0 + x));
    }

    #[test]
    fn fixed_points_and_order(gamma in 0.0f64..1.999, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assert_eq!(kpz_inverse(0.0, gamma).unwrap(), 0.0);
        prop_assert!((kpz_inverse(1.0, gamma).unwrap() - 1.0).abs() < 1e-12);
        let (dx, dy) = (kpz_inverse(x, gamma).unwrap(), kpz_inverse(y, gamma).unwrap());
        prop_assert!((x < y) == (dx < dy) || x == y);
        // on [0, 1] the quantum exponent dominates the Euclidean one
        prop_assert!(dx >= x - 1e-15 && dx <= 1.0 + 1e-12);
        prop_assert_eq!(boundary_kpz_inverse(x, gamma).unwrap(), dx);
    }

    #[test]
    fn ldp_minimum_is_gamma_delta(gamma in 0.05f64..1.95, x in 0.0f64..5.0) {
        let a = KpzParams::new(gamma).unwrap().a;
        let (_, beta) = ldp_optimum(x, a).unwrap();
        let d = kpz_inverse(x, gamma).unwrap();
        prop_assert!((beta - gamma * d).abs() < 1e-10 * (1.0 + beta));
        let p = PassageProblem::new(a, 1.0, x).unwrap();
        prop_assert!((p.beta() - beta).abs() < 1e-10 * (1.0 + beta));
    }
}

#[test]
fn rejects_out_of_range() {
    assert!(kpz_inverse(0.5, 2.0).is_err());
    assert!(kpz_inverse(0.5, -0.1).is_err());
    assert!(kpz_forward(-1.0, 1.0).is_err());
}

use std::f64::consts::PI;

use dsm_core::special_fn::{bessel_j, bessel_j_orders, hankel_h0_second, jacobi_anger, safe_truncation_order};
use num_complex::Complex64;
use proptest::prelude::*;

/// Power series `Σ_j (−1)^j (x/2)^{2j+m} / (j! (j+m)!)`, summed until the
/// terms drop below 1e-18.
fn series_j(m: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (1..=m).fold(1.0, |t, k| t * half / k as f64);
    let mut sum = term;
    for j in 1.. {
        term *= -half * half / (j as f64 * (j + m) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn bisect_series_zero(mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if series_j(0, lo) * series_j(0, mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn j0_at_one_matches_series() {
    let want = series_j(0, 1.0);
    assert!((bessel_j(0, 1.0).unwrap() - want).abs() <= 1e-15);
}

#[test]
fn matches_series_on_small_arguments() {
    for m in 0..12u32 {
        for step in 1..=80 {
            let x = step as f64 * 0.1;
            let got = bessel_j(m as i32, x).unwrap();
            assert!((got - series_j(m, x)).abs() <= 1e-13, "J_{m}({x})");
        }
    }
}

#[test]
fn first_zero_of_j0() {
    let zero = bisect_series_zero(2.0, 3.0);
    assert!((zero - 2.404_825_557_695_773).abs() <= 1e-9);
    let h = hankel_h0_second(2.404_825_557_695_773).unwrap();
    assert!(h.re.abs() <= 1e-9);
}

#[test]
fn hankel_large_argument_magnitude() {
    let x = 50.0;
    let h = hankel_h0_second(x).unwrap();
    let lead = (2.0 / (PI * x)).sqrt();
    assert!((h.norm() - lead).abs() <= 0.02 * lead);
}

#[test]
fn jacobi_anger_reproduces_plane_wave() {
    let theta = PI / 4.0;
    let got = jacobi_anger(3.0, theta, 40).unwrap();
    let want = Complex64::from_polar(1.0, 3.0 * theta.cos());
    assert!((got - want).norm() <= 1e-12);
}

#[test]
fn jacobi_anger_convergence_grid() {
    for step in 0..=40 {
        let x = step as f64 * 0.5;
        let order = safe_truncation_order(x);
        for t in 0..100 {
            let theta = -PI + 2.0 * PI * t as f64 / 100.0;
            let err = (jacobi_anger(x, theta, order).unwrap() - Complex64::from_polar(1.0, x * theta.cos())).norm();
            assert!(err <= 1e-10, "x={x} θ={theta}: {err}");
        }
    }
}

#[test]
fn recurrence_residual_on_grid() {
    for step in 1..=300 {
        let x = step as f64 * 0.1;
        let j = bessel_j_orders(31, x).unwrap();
        for m in 1..=30 {
            let r = j[m - 1] + j[m + 1] - (2.0 * m as f64 / x) * j[m];
            assert!(r.abs() <= 1e-10, "m={m} x={x}: {r}");
        }
    }
}

#[test]
fn truncation_error_shrinks_with_order() {
    let (x, theta) = (12.0, 0.7);
    let exact = Complex64::from_polar(1.0, x * f64::cos(theta));
    let mut last = f64::INFINITY;
    for order in [4, 8, 12, 16, 20, 30] {
        let err = (jacobi_anger(x, theta, order).unwrap() - exact).norm();
        assert!(err < last, "order {order}");
        last = err;
    }
}

proptest! {
    #[test]
    fn recurrence_holds(m in 1i32..=30, x in 1e-3f64..30.0) {
        let lhs = bessel_j(m - 1, x).unwrap() + bessel_j(m + 1, x).unwrap();
        let rhs = 2.0 * m as f64 / x * bessel_j(m, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn bounded_by_one(m in -200i32..=200, x in -2000.0f64..2000.0) {
        prop_assert!(bessel_j(m, x).unwrap().abs() <= 1.0);
    }

    #[test]
    fn parity_in_argument(m in -50i32..=50, x in 0.0f64..500.0) {
        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(bessel_j(m, -x).unwrap(), sign * bessel_j(m, x).unwrap());
    }

    #[test]
    fn orders_agree_with_single_evaluation(m in 0usize..60, x in 0.01f64..100.0) {
        let all = bessel_j_orders(60, x).unwrap();
        prop_assert!((all[m] - bessel_j(m as i32, x).unwrap()).abs() <= 1e-14);
    }
}

use std::f64::consts::PI;

use hypsegal::limits::PoleRegion;
use hypsegal::spherical::{self, ladder_c, ladder_d};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// `sin(lambda r) / (lambda sinh r)`.
fn phi_n1(lambda: f64, r: f64) -> f64 {
    (lambda * r).sin() / (lambda * r.sinh())
}

/// `3 (sin(lambda r) cosh r - lambda cos(lambda r) sinh r) / (lambda (1 + lambda^2) sinh^3 r)`.
fn phi_n2(lambda: f64, r: f64) -> f64 {
    let num = (lambda * r).sin() * r.cosh() - lambda * (lambda * r).cos() * r.sinh();
    3.0 * num / (lambda * (1.0 + lambda * lambda) * r.sinh().powi(3))
}

#[test]
fn closed_forms_on_the_real_axis() {
    for lambda in [0.3, 1.0, 2.5, 7.0] {
        for r in [0.5, 1.0, 2.0, 4.0] {
            let a = spherical::phi_real(lambda, 1, r).unwrap();
            assert!((a - phi_n1(lambda, r)).abs() < 1e-12, "n=1 lambda={lambda} r={r}");
            let b = spherical::phi_real(lambda, 2, r).unwrap();
            assert!((b - phi_n2(lambda, r)).abs() < 1e-11, "n=2 lambda={lambda} r={r}: {b} vs {}", phi_n2(lambda, r));
        }
    }
}

#[test]
fn closed_form_on_the_imaginary_axis() {
    for lambda in [0.3, 1.0, 4.0] {
        for r in [c(0.5, 0.0), c(2.0, 0.1), c(4.0, -0.3), c(7.9, 0.3)] {
            let v = spherical::phi_i(lambda, 1, r).unwrap();
            let o = (lambda * r).sinh() / (lambda * r.sin());
            assert!(close(v, o, 1e-12), "lambda={lambda} r={r}: {v} vs {o}");
        }
    }
}

#[test]
fn normalised_at_origin() {
    for n in 0..=4 {
        for lambda in [0.0, 0.5, 3.0] {
            assert!((spherical::phi_real(lambda, n, 0.0).unwrap() - 1.0).abs() < 1e-13);
            assert!(close(spherical::phi_i(lambda, n, c(0.0, 0.0)).unwrap(), c(1.0, 0.0), 1e-13));
        }
    }
}

#[test]
fn imaginary_axis_radial_equation() {
    // psi'' + 2n cot r psi' = (lambda^2 + n^2) psi
    for n in 1..=3 {
        let s = spherical::spherical(n);
        let (d1, d2) = (s.imag_derivative(1), s.imag_derivative(2));
        for lambda in [0.5, 2.0] {
            for r in [c(0.7, 0.0), c(2.0, 0.2), c(5.0, 0.3)] {
                let psi = s.phi_i(lambda, r).unwrap();
                let lhs = d2.eval(lambda, r).unwrap() + 2.0 * n as f64 * r.cos() / r.sin() * d1.eval(lambda, r).unwrap();
                let rhs = psi * (lambda * lambda + (n * n) as f64);
                assert!(close(lhs, rhs, 1e-9 * psi.norm().max(1.0)), "n={n} lambda={lambda} r={r}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn real_axis_radial_equation() {
    // phi'' + 2n coth r phi' = -(lambda^2 + n^2) phi, five-point differences
    let h = 1e-3;
    for n in 1..=3 {
        for lambda in [0.5, 2.0] {
            for r in [0.5, 1.5, 3.0] {
                let f = |x: f64| spherical::phi_real(lambda, n, x).unwrap();
                let d1 = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h);
                let d2 = (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h * h);
                let res = d2 + 2.0 * n as f64 / r.tanh() * d1 + (lambda * lambda + (n * n) as f64) * f(r);
                assert!(res.abs() < 1e-7, "n={n} lambda={lambda} r={r}: {res:e}");
            }
        }
    }
}

#[test]
fn ladder_relation() {
    // (1/sin r) d/dr phi_k(ir) = d(lambda, k) phi_{k+1}(ir)
    for k in 0..=3 {
        let d = spherical::spherical(k).imag_derivative(1);
        for lambda in [0.0, 0.7, 3.0] {
            for r in [c(0.4, 0.0), c(1.9, 0.25), c(4.4, -0.2)] {
                let lhs = d.eval(lambda, r).unwrap() / r.sin();
                let rhs = spherical::phi_i(lambda, k + 1, r).unwrap() * ladder_d(lambda, k);
                assert!(close(lhs, rhs, 1e-10), "k={k} lambda={lambda} r={r}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn shift_operators_on_spherical_functions() {
    for n in 1..=3 {
        for lambda in [0.5, 1.7] {
            for r in [c(0.3, 0.0), c(1.2, 0.2), c(2.6, -0.1)] {
                let down = spherical::apply_dtilde_to_phi(lambda, n, r).unwrap();
                assert!(close(down, (lambda * r).cosh(), 1e-10), "n={n}");
                let up = spherical::apply_dtilde_star_to_cosh(lambda, n, r).unwrap();
                let want = spherical::phi_i(lambda, n, r).unwrap() * ladder_c(lambda, n);
                assert!(close(up, want, 1e-10), "n={n}: {up} vs {want}");
            }
        }
    }
}

#[test]
fn ladder_constants() {
    assert_eq!(ladder_d(2.0, 1), 5.0 / 3.0);
    assert!((ladder_c(1.0, 1) + 1.0 / (2.0 * PI)).abs() < 1e-16);
}

fn region_point() -> impl Strategy<Value = Complex64> {
    let region = PoleRegion::default();
    (0.05f64..9.0, -0.95f64..0.95)
        .prop_map(|(x, y)| c(x, y))
        .prop_filter("inside the pole region", move |z| region.contains(*z) && z.norm() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circular_radial_equation_in_region(k in 0u32..4, lambda in 0.0f64..6.0, r in region_point()) {
        // psi'' + 2k cot r psi' = (lambda^2 + k^2) psi
        let s = spherical::spherical(k);
        let psi = s.phi_i(lambda, r).unwrap();
        let d1 = s.imag_derivative(1).eval(lambda, r).unwrap();
        let d2 = s.imag_derivative(2).eval(lambda, r).unwrap();
        let lhs = d2 + d1 * (r.cos() / r.sin()) * (2.0 * k as f64);
        let rhs = psi * (lambda * lambda + (k * k) as f64);
        let scale = d2.norm().max(rhs.norm()).max(1e-300);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn hyperbolic_radial_equation_in_region(k in 0u32..4, lambda in 0.0f64..6.0, r in region_point()) {
        // phi(z) = psi(-iz): phi'' + 2k coth z phi' = -(lambda^2 + k^2) phi
        let s = spherical::spherical(k);
        let w = -Complex64::i() * r;
        let phi = s.phi_i(lambda, w).unwrap();
        let d1 = -Complex64::i() * s.imag_derivative(1).eval(lambda, w).unwrap();
        let d2 = -s.imag_derivative(2).eval(lambda, w).unwrap();
        let lhs = d2 + d1 * (r.cosh() / r.sinh()) * (2.0 * k as f64);
        let rhs = -phi * (lambda * lambda + (k * k) as f64);
        let scale = d2.norm().max(rhs.norm()).max(1e-300);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * scale, "{} vs {}", lhs, rhs);
        let on_axis = s.phi_i(lambda, c(0.0, -r.re)).unwrap();
        let direct = spherical::phi_real(lambda, k, r.re).unwrap();
        prop_assert!((on_axis.re - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn even_in_lambda_and_r(n in 0u32..4, lambda in 0.0f64..6.0, re in 0.0f64..3.0, im in -0.3f64..0.3) {
        let r = c(re, im);
        let a = spherical::phi_i(lambda, n, r).unwrap();
        prop_assert!(close(spherical::phi_i(-lambda, n, r).unwrap(), a, 1e-12));
        prop_assert!(close(spherical::phi_i(lambda, n, -r).unwrap(), a, 1e-10));
    }

    #[test]
    fn bounded_by_one_on_real_axis(n in 0u32..4, lambda in 0.0f64..8.0, r in 0.0f64..6.0) {
        let v = spherical::phi_real(lambda, n, r).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-10);
    }

    #[test]
    fn real_on_the_real_line(n in 0u32..4, lambda in 0.0f64..6.0, r in 0.0f64..3.0) {
        let v = spherical::phi_i(lambda, n, c(r, 0.0)).unwrap();
        prop_assert!(v.im.abs() <= 1e-12 * v.re.abs().max(1.0));
    }
}

use std::f64::consts::PI;

use hypsegal::kernels;
use hypsegal::limits::PoleRegion;
use hypsegal::trigexpr::{Coeff, Flavor, SymExpr};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn s(flavor: Flavor, r: Complex64) -> Complex64 {
    match flavor {
        Flavor::Circular => r.sin(),
        Flavor::Hyperbolic => r.sinh(),
    }
}

fn c(flavor: Flavor, r: Complex64) -> Complex64 {
    match flavor {
        Flavor::Circular => r.cos(),
        Flavor::Hyperbolic => r.cosh(),
    }
}

#[derive(Debug, Clone)]
struct Mono {
    num: i64,
    den: i64,
    rate2: i64,
    r: u32,
    s: i32,
    c: u32,
}

impl Mono {
    fn expr(&self, flavor: Flavor) -> SymExpr {
        let rate = BigRational::new(BigInt::from(self.rate2), BigInt::from(2));
        SymExpr::monomial(flavor, Coeff::ratio(self.num, self.den), rate, self.r, self.s, self.c)
    }

    /// Direct evaluation, independent of the compiled form.
    fn eval(&self, flavor: Flavor, z: Complex64) -> Complex64 {
        let rate = self.rate2 as f64 / 2.0;
        (-rate * z * z).exp() * z.powu(self.r) * s(flavor, z).powi(self.s) * c(flavor, z).powu(self.c) * (self.num as f64 / self.den as f64)
    }
}

fn mono() -> impl Strategy<Value = Mono> {
    (-5i64..=5, 1i64..=4, 0i64..=2, 0u32..=3, -2i32..=3, 0u32..=2).prop_map(|(num, den, rate2, r, s, c)| Mono { num, den, rate2, r, s, c })
}

fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::Circular), Just(Flavor::Hyperbolic)]
}

fn sum(ms: &[Mono], flavor: Flavor) -> SymExpr {
    ms.iter().fold(SymExpr::zero(flavor), |acc, m| acc.add(&m.expr(flavor)).unwrap())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// Points of `{Re r > 0, |Im r| < 1}` at distance more than 0.3 from every `m pi`.
fn point() -> impl Strategy<Value = Complex64> {
    let region = PoleRegion::default();
    (0.05f64..9.0, -0.95f64..0.95)
        .prop_map(|(x, y)| Complex64::new(x, y))
        .prop_filter("inside the pole region", move |z| region.contains(*z) && z.norm() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn evaluation_matches_direct_formula(ms in prop::collection::vec(mono(), 1..4), f in flavor(), z in point()) {
        let e = sum(&ms, f);
        let want: Complex64 = ms.iter().map(|m| m.eval(f, z)).sum();
        prop_assert!(close(e.evaluate(z).unwrap(), want, 1e-11));
    }

    #[test]
    fn product_evaluates_to_product(a in prop::collection::vec(mono(), 1..3), b in prop::collection::vec(mono(), 1..3), f in flavor(), z in point()) {
        let (x, y) = (sum(&a, f), sum(&b, f));
        let p = x.multiply(&y).unwrap();
        let want = x.evaluate(z).unwrap() * y.evaluate(z).unwrap();
        prop_assert!(close(p.evaluate(z).unwrap(), want, 1e-10));
        prop_assert_eq!(p, y.multiply(&x).unwrap());
    }

    #[test]
    fn derivative_matches_differences(ms in prop::collection::vec(mono(), 1..4), f in flavor(), z in point()) {
        // the expressions are analytic, so a real-direction stencil is a complex derivative
        let e = sum(&ms, f);
        let h = 1e-3;
        let at = |w: Complex64| e.evaluate(w).unwrap();
        let hh = Complex64::new(h, 0.0);
        let fd = (at(z - hh * 2.0) - at(z - hh) * 8.0 + at(z + hh) * 8.0 - at(z + hh * 2.0)) / (12.0 * h);
        let exact = e.differentiate().evaluate(z).unwrap();
        let scale = exact.norm().max(at(z).norm()).max(1e-300);
        prop_assert!((exact - fd).norm() <= 1e-8 * scale, "{} vs {}", exact, fd);
    }

    #[test]
    fn l_operator_definition(ms in prop::collection::vec(mono(), 1..4), f in flavor(), z in point()) {
        let e = sum(&ms, f);
        let want = -e.differentiate().evaluate(z).unwrap() / (s(f, z) * 2.0 * PI);
        prop_assert!(close(e.apply_l().evaluate(z).unwrap(), want, 1e-11));
    }

    #[test]
    fn parity_flag_is_honest(ms in prop::collection::vec(mono(), 1..4), f in flavor(), z in point()) {
        let e = sum(&ms, f);
        if e.is_even() {
            prop_assert!(close(e.evaluate(-z).unwrap(), e.evaluate(z).unwrap(), 1e-11));
        }
    }

    #[test]
    fn json_round_trip(ms in prop::collection::vec(mono(), 1..4), f in flavor(), z in point()) {
        let e = sum(&ms, f);
        let text = e.to_json();
        let back = SymExpr::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        if !e.is_zero() {
            prop_assert_eq!(back.flavor(), f);
        }
        prop_assert!(close(back.evaluate(z).unwrap(), e.evaluate(z).unwrap(), 1e-14));
    }

    #[test]
    fn add_then_subtract_is_identity(a in prop::collection::vec(mono(), 1..3), b in prop::collection::vec(mono(), 1..3), f in flavor()) {
        let (x, y) = (sum(&a, f), sum(&b, f));
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x);
    }

    #[test]
    fn coefficient_arithmetic(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20) {
        let (x, y) = (Coeff::ratio(a, b), Coeff::ratio(c, d));
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert!((x.mul(&y).to_f64() - (a as f64 / b as f64) * (c as f64 / d as f64)).abs() < 1e-12);
        prop_assert!(x.add(&x.neg()).is_zero());
    }
}

#[test]
fn mixing_flavors_is_an_error() {
    let a = SymExpr::one(Flavor::Circular);
    let b = SymExpr::one(Flavor::Hyperbolic);
    assert!(a.add(&b).is_err());
    assert!(a.multiply(&b).is_err());
}

#[test]
fn nu_has_pole_of_order_2n_minus_1() {
    for n in 1..=3u32 {
        let nu = kernels::nu(0.5, n).unwrap();
        for m in [1, 2, -1] {
            assert_eq!(nu.pole_order_at(m).unwrap(), 2 * n - 1, "n={n} m={m}");
        }
        assert!(nu.is_even());
    }
}

#[test]
fn closure_under_l_and_sine_powers() {
    for n in 1..=3u32 {
        let g = kernels::euclid_gaussian(0.5, Flavor::Circular).unwrap();
        let mut e = g.clone();
        for _ in 0..2 * n {
            e = e.apply_l().multiply(&SymExpr::sin_power(Flavor::Circular, 2 * n as i32)).unwrap();
            let again = SymExpr::from_terms(Flavor::Circular, e.terms());
            assert_eq!(again, e);
            assert_eq!(SymExpr::from_terms(Flavor::Circular, again.terms()), again);
        }
    }
}

#[test]
fn exact_constants_survive_l() {
    // L^n of a Gaussian is exact: applying L twice equals applying it in one go
    let g = SymExpr::gaussian(Flavor::Circular, BigRational::new(BigInt::from(1), BigInt::from(2)));
    assert_eq!(g.apply_l().apply_l(), g.apply_l_times(2));
    assert!(g.apply_l_times(0) == g);
}

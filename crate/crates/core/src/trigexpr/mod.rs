//! Exact symbolic expressions of the form
//!
//! ```text
//!     sum_i  c_i * exp(-a_i r^2) * r^p_i * S(r)^s_i * C(r)^q_i
//! ```
//!
//! where `(S, C)` is `(sin, cos)` for the circular flavor and
//! `(sinh, cosh)` for the hyperbolic one. The class is closed under `d/dr`,
//! under multiplication, and under the ladder operator
//! `L = -(1/2pi) (1/S) d/dr`, so every heat kernel, shift-operator image and
//! integration-by-parts boundary factor lives here.
//!
//! Canonical form: terms are keyed by `(a, p, s, q)`, zero coefficients are
//! dropped, and `C^2` is rewritten as `1 -/+ S^2`, so that `q` is always 0
//! or 1. With that reduction distinct keys are linearly independent and
//! structural equality is functional equality.

mod coeff;
mod numeric;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use coeff::Coeff;
pub use numeric::{NumExpr, DEFAULT_POLE_GUARD, SERIES_ORDER, SERIES_RADIUS};

use crate::error::{Error, Result};

/// Trigonometric flavor of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `sin`, `cos`: radial calculus on spheres and on the imaginary axis.
    Circular,
    /// `sinh`, `cosh`: radial calculus on hyperbolic space.
    Hyperbolic,
}

impl Flavor {
    /// `dC/dr = sign * S`.
    pub fn cos_derivative_sign(self) -> i64 {
        match self {
            Flavor::Circular => -1,
            Flavor::Hyperbolic => 1,
        }
    }

    /// `C^2 = 1 + sign * S^2`.
    pub fn pythagoras_sign(self) -> i64 {
        match self {
            Flavor::Circular => -1,
            Flavor::Hyperbolic => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Circular => "circular",
            Flavor::Hyperbolic => "hyperbolic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(Flavor::Circular),
            "hyperbolic" => Ok(Flavor::Hyperbolic),
            other => Err(Error::Parse(format!("unknown flavor {other:?}"))),
        }
    }
}

/// Monomial key: `(gauss_rate, r_power, s_power, c_power)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub gauss_rate: BigRational,
    pub r_power: u32,
    pub s_power: i32,
    pub c_power: u32,
}

/// One term of a [`SymExpr`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymTerm {
    pub coeff: Coeff,
    pub gauss_rate: BigRational,
    pub r_power: u32,
    pub s_power: i32,
    pub c_power: u32,
}

impl SymTerm {
    fn key(&self) -> TermKey {
        TermKey {
            gauss_rate: self.gauss_rate.clone(),
            r_power: self.r_power,
            s_power: self.s_power,
            c_power: self.c_power,
        }
    }
}

/// Canonical symbolic expression; see the module docs.
#[derive(Debug, Clone)]
pub struct SymExpr {
    flavor: Flavor,
    terms: BTreeMap<TermKey, Coeff>,
    compiled: OnceLock<Arc<NumExpr>>,
}

impl PartialEq for SymExpr {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.terms == other.terms
    }
}

impl SymExpr {
    pub fn zero(flavor: Flavor) -> Self {
        SymExpr {
            flavor,
            terms: BTreeMap::new(),
            compiled: OnceLock::new(),
        }
    }

    /// Build from arbitrary terms and canonicalize.
    pub fn from_terms<I: IntoIterator<Item = SymTerm>>(flavor: Flavor, terms: I) -> Self {
        let mut acc: BTreeMap<TermKey, Coeff> = BTreeMap::new();
        let mut stack: Vec<SymTerm> = terms.into_iter().collect();
        while let Some(t) = stack.pop() {
            if t.coeff.is_zero() {
                continue;
            }
            if t.c_power >= 2 {
                // C^2 = 1 + sign S^2
                let sign = flavor.pythagoras_sign();
                stack.push(SymTerm {
                    c_power: t.c_power - 2,
                    ..t.clone()
                });
                stack.push(SymTerm {
                    coeff: t.coeff.scale_int(sign),
                    s_power: t.s_power + 2,
                    c_power: t.c_power - 2,
                    ..t
                });
                continue;
            }
            let key = t.key();
            let merged = match acc.remove(&key) {
                Some(c) => c.add(&t.coeff),
                None => t.coeff,
            };
            if !merged.is_zero() {
                acc.insert(key, merged);
            }
        }
        SymExpr {
            flavor,
            terms: acc,
            compiled: OnceLock::new(),
        }
    }

    pub fn monomial(
        flavor: Flavor,
        coeff: Coeff,
        gauss_rate: BigRational,
        r_power: u32,
        s_power: i32,
        c_power: u32,
    ) -> Self {
        SymExpr::from_terms(
            flavor,
            [SymTerm {
                coeff,
                gauss_rate,
                r_power,
                s_power,
                c_power,
            }],
        )
    }

    pub fn constant(flavor: Flavor, c: Coeff) -> Self {
        SymExpr::monomial(flavor, c, BigRational::zero(), 0, 0, 0)
    }

    pub fn one(flavor: Flavor) -> Self {
        SymExpr::constant(flavor, Coeff::one())
    }

    /// `S(r)^k`.
    pub fn sin_power(flavor: Flavor, k: i32) -> Self {
        SymExpr::monomial(flavor, Coeff::one(), BigRational::zero(), 0, k, 0)
    }

    /// `C(r)`.
    pub fn cos(flavor: Flavor) -> Self {
        SymExpr::monomial(flavor, Coeff::one(), BigRational::zero(), 0, 0, 1)
    }

    /// `r^k`.
    pub fn r_power(flavor: Flavor, k: u32) -> Self {
        SymExpr::monomial(flavor, Coeff::one(), BigRational::zero(), k, 0, 0)
    }

    /// Unnormalized Gaussian `exp(-rate r^2)`.
    pub fn gaussian(flavor: Flavor, rate: BigRational) -> Self {
        SymExpr::monomial(flavor, Coeff::one(), rate, 0, 0, 0)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = SymTerm> + '_ {
        self.terms.iter().map(|(k, c)| SymTerm {
            coeff: c.clone(),
            gauss_rate: k.gauss_rate.clone(),
            r_power: k.r_power,
            s_power: k.s_power,
            c_power: k.c_power,
        })
    }

    /// Most negative power of `S` present (0 if none).
    pub fn min_s_power(&self) -> i32 {
        self.terms.keys().map(|k| k.s_power).min().unwrap_or(0).min(0)
    }

    /// Relabel the flavor (used when passing between `r` and `ir`).
    pub fn with_flavor(&self, flavor: Flavor) -> SymExpr {
        SymExpr::from_terms(flavor, self.terms())
    }

    fn check_flavor(&self, other: &SymExpr) -> Result<()> {
        if self.flavor == other.flavor {
            Ok(())
        } else {
            Err(Error::FlavorMismatch)
        }
    }

    pub fn add(&self, other: &SymExpr) -> Result<SymExpr> {
        self.check_flavor(other)?;
        Ok(SymExpr::from_terms(self.flavor, self.terms().chain(other.terms())))
    }

    pub fn sub(&self, other: &SymExpr) -> Result<SymExpr> {
        self.add(&other.scale(&Coeff::int(-1)))
    }

    pub fn scale(&self, c: &Coeff) -> SymExpr {
        SymExpr::from_terms(
            self.flavor,
            self.terms().map(|t| SymTerm {
                coeff: t.coeff.mul(c),
                ..t
            }),
        )
    }

    pub fn multiply(&self, other: &SymExpr) -> Result<SymExpr> {
        self.check_flavor(other)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in self.terms() {
            for b in other.terms() {
                out.push(SymTerm {
                    coeff: a.coeff.mul(&b.coeff),
                    gauss_rate: &a.gauss_rate + &b.gauss_rate,
                    r_power: a.r_power + b.r_power,
                    s_power: a.s_power + b.s_power,
                    c_power: a.c_power + b.c_power,
                });
            }
        }
        Ok(SymExpr::from_terms(self.flavor, out))
    }

    /// Exact `d/dr`.
    pub fn differentiate(&self) -> SymExpr {
        let mut out = Vec::with_capacity(4 * self.len());
        let dc = self.flavor.cos_derivative_sign();
        for t in self.terms() {
            // exp(-a r^2)
            if !t.gauss_rate.is_zero() {
                let two_a = &t.gauss_rate * BigRational::from_integer(BigInt::from(-2));
                out.push(SymTerm {
                    coeff: t.coeff.scale(&two_a),
                    r_power: t.r_power + 1,
                    ..t.clone()
                });
            }
            // r^p
            if t.r_power > 0 {
                out.push(SymTerm {
                    coeff: t.coeff.scale_int(t.r_power as i64),
                    r_power: t.r_power - 1,
                    ..t.clone()
                });
            }
            // S^s
            if t.s_power != 0 {
                out.push(SymTerm {
                    coeff: t.coeff.scale_int(t.s_power as i64),
                    s_power: t.s_power - 1,
                    c_power: t.c_power + 1,
                    ..t.clone()
                });
            }
            // C^q
            if t.c_power > 0 {
                out.push(SymTerm {
                    coeff: t.coeff.scale_int(dc * t.c_power as i64),
                    s_power: t.s_power + 1,
                    c_power: t.c_power - 1,
                    ..t.clone()
                });
            }
        }
        SymExpr::from_terms(self.flavor, out)
    }

    /// `L e = -(1/2pi) (1/S) de/dr`.
    pub fn apply_l(&self) -> SymExpr {
        let minus_inv_tau = Coeff::tau_monomial(-BigRational::one(), -1);
        let d = self.differentiate();
        SymExpr::from_terms(
            self.flavor,
            d.terms().map(|t| SymTerm {
                coeff: t.coeff.mul(&minus_inv_tau),
                s_power: t.s_power - 1,
                ..t
            }),
        )
    }

    /// `L^m e`.
    pub fn apply_l_times(&self, m: u32) -> SymExpr {
        (0..m).fold(self.clone(), |e, _| e.apply_l())
    }

    /// `e(-r) == e(r)` identically. In canonical form each monomial has
    /// parity `(-1)^(p + s)`, and distinct monomials are independent.
    pub fn is_even(&self) -> bool {
        self.terms
            .keys()
            .all(|k| (k.r_power as i64 + k.s_power as i64).rem_euclid(2) == 0)
    }

    /// Cached floating-point form.
    pub fn numeric(&self) -> Arc<NumExpr> {
        self.compiled
            .get_or_init(|| Arc::new(NumExpr::compile(self)))
            .clone()
    }

    /// Evaluate at a complex point.
    pub fn evaluate(&self, r: Complex64) -> Result<Complex64> {
        self.numeric().eval(r)
    }

    pub fn evaluate_real(&self, r: f64) -> Result<f64> {
        Ok(self.evaluate(Complex64::new(r, 0.0))?.re)
    }

    /// Order of the pole at `m*pi` (circular flavor), measured from a
    /// Laurent fit on a circle of radius `1e-2`.
    pub fn pole_order_at(&self, m: i64) -> Result<u32> {
        numeric::pole_order_at(self, m)
    }

    /// JSON document: array of terms.
    pub fn to_json(&self) -> String {
        let docs: Vec<TermDoc> = self
            .terms()
            .map(|t| TermDoc {
                coeff: format_decimal(t.coeff.to_f64()),
                gauss_rate: t.gauss_rate.to_f64().unwrap_or(f64::NAN),
                r_power: t.r_power,
                s_power: t.s_power,
                c_power: t.c_power,
                flavor: self.flavor,
            })
            .collect();
        serde_json::to_string_pretty(&docs).expect("term documents always serialize")
    }

    /// Parse the JSON produced by [`SymExpr::to_json`]. Coefficients are read
    /// back as exact binary rationals of the printed decimals. An empty array
    /// carries no flavor and reads back as the circular zero.
    pub fn from_json(text: &str) -> Result<SymExpr> {
        let docs: Vec<TermDoc> = serde_json::from_str(text)?;
        let flavor = docs.first().map(|d| d.flavor).unwrap_or(Flavor::Circular);
        let mut terms = Vec::with_capacity(docs.len());
        for d in docs {
            if d.flavor != flavor {
                return Err(Error::FlavorMismatch);
            }
            let v: f64 = d
                .coeff
                .parse()
                .map_err(|e| Error::Parse(format!("coefficient {:?}: {e}", d.coeff)))?;
            let coeff = Coeff::from_f64(v).ok_or_else(|| Error::Parse(format!("non-finite coefficient {v}")))?;
            let gauss_rate = BigRational::from_float(d.gauss_rate)
                .filter(|q| !q.is_negative())
                .ok_or_else(|| Error::Parse(format!("bad gauss_rate {}", d.gauss_rate)))?;
            terms.push(SymTerm {
                coeff,
                gauss_rate,
                r_power: d.r_power,
                s_power: d.s_power,
                c_power: d.c_power,
            });
        }
        Ok(SymExpr::from_terms(flavor, terms))
    }
}

fn format_decimal(v: f64) -> String {
    // Shortest representation that round-trips through `str::parse`.
    format!("{v:?}")
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    coeff: String,
    gauss_rate: f64,
    r_power: u32,
    s_power: i32,
    c_power: u32,
    flavor: Flavor,
}

/// Exact Gaussian decay rate `1/(2t)` for a time given in floating point.
pub fn rate_for_time(t: f64) -> Result<BigRational> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let q = BigRational::from_float(t).expect("finite");
    Ok((q * BigRational::from_integer(BigInt::from(2))).recip())
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let (s, c) = match self.flavor {
            Flavor::Circular => ("sin", "cos"),
            Flavor::Hyperbolic => ("sinh", "cosh"),
        };
        for (i, (k, coeff)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({coeff})")?;
            if !k.gauss_rate.is_zero() {
                write!(f, "*exp(-{}*r^2)", k.gauss_rate)?;
            }
            if k.r_power > 0 {
                write!(f, "*r^{}", k.r_power)?;
            }
            if k.s_power != 0 {
                write!(f, "*{s}^{}", k.s_power)?;
            }
            if k.c_power > 0 {
                write!(f, "*{c}^{}", k.c_power)?;
            }
        }
        Ok(())
    }
}

// Free-function spellings of the core operations.

pub fn differentiate(e: &SymExpr) -> SymExpr {
    e.differentiate()
}

pub fn apply_l(e: &SymExpr) -> SymExpr {
    e.apply_l()
}

pub fn evaluate(e: &SymExpr, r: Complex64) -> Result<Complex64> {
    e.evaluate(r)
}

pub fn pole_order_at(e: &SymExpr, m: i64) -> Result<u32> {
    e.pole_order_at(m)
}

pub fn is_even(e: &SymExpr) -> bool {
    e.is_even()
}

pub fn add(a: &SymExpr, b: &SymExpr) -> Result<SymExpr> {
    a.add(b)
}

pub fn scale(a: &SymExpr, c: &Coeff) -> SymExpr {
    a.scale(c)
}

pub fn multiply(a: &SymExpr, b: &SymExpr) -> Result<SymExpr> {
    a.multiply(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const C: Flavor = Flavor::Circular;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn z(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn derivative_of_cos_is_minus_sin() {
        let d = SymExpr::cos(C).differentiate();
        assert_eq!(d, SymExpr::sin_power(C, 1).scale(&Coeff::int(-1)));
    }

    #[test]
    fn derivative_of_gaussian() {
        // t = 1: rate 1/2
        let g = SymExpr::gaussian(C, q(1, 2));
        let expected = SymExpr::monomial(C, Coeff::int(-1), q(1, 2), 1, 0, 0);
        assert_eq!(g.differentiate(), expected);
    }

    #[test]
    fn derivative_of_inverse_sine() {
        let e = SymExpr::sin_power(C, -1);
        let expected = SymExpr::monomial(C, Coeff::int(-1), BigRational::zero(), 0, -2, 1);
        assert_eq!(e.differentiate(), expected);
    }

    #[test]
    fn l_of_cos_is_inverse_tau() {
        let l = SymExpr::cos(C).apply_l();
        let expected = SymExpr::constant(C, Coeff::tau_monomial(BigRational::one(), -1));
        assert_eq!(l, expected);
    }

    #[test]
    fn l_of_gaussian() {
        let l = SymExpr::gaussian(C, q(1, 2)).apply_l();
        let expected = SymExpr::monomial(C, Coeff::tau_monomial(BigRational::one(), -1), q(1, 2), 1, -1, 0);
        assert_eq!(l, expected);
    }

    #[test]
    fn algebra_examples() {
        let c = SymExpr::cos(C);
        assert_eq!(c.add(&c).unwrap(), c.scale(&Coeff::int(2)));
        let one = SymExpr::sin_power(C, 2).multiply(&SymExpr::sin_power(C, -2)).unwrap();
        assert_eq!(one, SymExpr::one(C));
        let a = SymExpr::monomial(C, Coeff::one(), BigRational::zero(), 1, -1, 0);
        let b = a.multiply(&SymExpr::sin_power(C, 2)).unwrap();
        assert_eq!(b, SymExpr::monomial(C, Coeff::one(), BigRational::zero(), 1, 1, 0));
    }

    #[test]
    fn pythagoras_is_canonical() {
        let c2 = SymExpr::cos(C).multiply(&SymExpr::cos(C)).unwrap();
        let s2 = SymExpr::sin_power(C, 2);
        assert_eq!(c2.add(&s2).unwrap(), SymExpr::one(C));
        let h = Flavor::Hyperbolic;
        let ch2 = SymExpr::cos(h).multiply(&SymExpr::cos(h)).unwrap();
        assert_eq!(ch2.sub(&SymExpr::sin_power(h, 2)).unwrap(), SymExpr::one(h));
    }

    #[test]
    fn flavors_do_not_mix() {
        let a = SymExpr::cos(C);
        let b = SymExpr::cos(Flavor::Hyperbolic);
        assert_eq!(a.add(&b), Err(Error::FlavorMismatch));
        assert_eq!(a.multiply(&b), Err(Error::FlavorMismatch));
    }

    #[test]
    fn parity() {
        assert!(SymExpr::cos(C).is_even());
        assert!(!SymExpr::sin_power(C, 1).is_even());
        let r_over_sin = SymExpr::monomial(C, Coeff::one(), BigRational::zero(), 1, -1, 0);
        assert!(r_over_sin.is_even());
    }

    #[test]
    fn evaluation_basics() {
        assert!((SymExpr::cos(C).evaluate(z(0.0)).unwrap() - 1.0).norm() < 1e-15);
        let r_over_sin = SymExpr::monomial(C, Coeff::one(), BigRational::zero(), 1, -1, 0);
        assert!((r_over_sin.evaluate(z(0.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((r_over_sin.evaluate(z(1e-4)).unwrap() - 1.0).norm() < 1e-8);
        let v = r_over_sin.evaluate(Complex64::new(1.0, 0.5)).unwrap();
        let w = Complex64::new(1.0, 0.5) / Complex64::new(1.0, 0.5).sin();
        assert!((v - w).norm() < 1e-14);
    }

    #[test]
    fn pole_guard() {
        let e = SymExpr::sin_power(C, -1);
        assert!(matches!(e.evaluate(z(PI + 1e-10)), Err(Error::Pole { .. })));
        assert!(matches!(e.evaluate(z(1e-10)), Err(Error::Pole { .. })));
        assert!(e.evaluate(z(PI + 1e-6)).is_ok());
    }

    #[test]
    fn pole_orders() {
        assert_eq!(SymExpr::cos(C).pole_order_at(1).unwrap(), 0);
        assert_eq!(SymExpr::sin_power(C, -3).pole_order_at(2).unwrap(), 3);
        // (1 - cos r)/sin^2 r = 1/(1 + cos r): order 2 at odd multiples, regular at even ones
        let e = SymExpr::one(C)
            .sub(&SymExpr::cos(C))
            .unwrap()
            .multiply(&SymExpr::sin_power(C, -2))
            .unwrap();
        assert_eq!(e.pole_order_at(1).unwrap(), 2);
        assert_eq!(e.pole_order_at(2).unwrap(), 0);
    }

    #[test]
    fn json_round_trip() {
        let e = SymExpr::gaussian(C, q(1, 2)).apply_l().apply_l();
        let text = e.to_json();
        let back = SymExpr::from_json(&text).unwrap();
        for x in [0.3, 1.1, 2.0] {
            let a = e.evaluate(z(x)).unwrap();
            let b = back.evaluate(z(x)).unwrap();
            assert!((a - b).norm() <= 1e-15 * a.norm());
        }
        assert_eq!(back.to_json(), text);
    }
}

//! Spherical functions of `H^{2k+1}` on the real axis and on the imaginary
//! axis, built from closed forms by the ladder
//!
//! ```text
//!     (1/sin r) d/dr phi_{lambda,k}(ir) = d(lambda,k) phi_{lambda,k+1}(ir),
//!     phi_{lambda,0}(ir) = cosh(lambda r),
//! ```
//!
//! and its real-axis counterpart with `sinh` and `cos`.
//!
//! Every expression here has the shape `sum lambda^{2p} B(r) f_j(lambda r)`
//! with `B` a [`SymExpr`] and `f_j` an entire family from [`crate::special`].

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::Laurent;
use crate::shift::{self, Radial};
use crate::special::{self, Family};
use crate::trigexpr::{Coeff, Flavor, NumExpr, SymExpr, DEFAULT_POLE_GUARD, SERIES_ORDER, SERIES_RADIUS};

/// `d(lambda, k) = (lambda^2 + k^2)/(2k+1)`.
pub fn ladder_d(lambda: f64, k: u32) -> f64 {
    (lambda * lambda + (k * k) as f64) / (2 * k + 1) as f64
}

/// `c(lambda, n) = prod_{k<n} d(lambda, k) / (-2 pi)^n`.
pub fn ladder_c(lambda: f64, n: u32) -> f64 {
    let p: f64 = (0..n).map(|k| ladder_d(lambda, k)).product();
    p / (-2.0 * PI).powi(n as i32)
}

/// `sum_{p,j} lambda^{2p} B_{p,j}(r) f_j(lambda r)`, divided by
/// `prod_{m=1}^{ladder-1} d(lambda, m)`.
#[derive(Debug, Clone)]
pub struct RadialExpr {
    flavor: Flavor,
    family: Family,
    ladder: u32,
    terms: BTreeMap<(u32, u32), SymExpr>,
    compiled: OnceLock<Arc<Compiled>>,
}

#[derive(Debug)]
struct Compiled {
    parts: Vec<(u32, u32, Arc<NumExpr>)>,
    jmax: u32,
    has_poles: bool,
    origin: OnceLock<OriginPoly>,
}

/// Origin expansion with every coefficient kept as a polynomial in
/// `lambda^2`: `coeffs[q - min_pow][e]` multiplies `lambda^{2e} r^q`.
#[derive(Debug)]
struct OriginPoly {
    min_pow: i32,
    coeffs: Vec<Vec<f64>>,
    mass: Vec<Vec<f64>>,
    regular_at_origin: bool,
}

impl OriginPoly {
    fn max_pow(&self) -> i32 {
        self.min_pow + self.coeffs.len() as i32 - 1
    }

    fn at(&self, lambda: f64) -> Laurent {
        let l2 = lambda * lambda;
        let mut out = Laurent::zeros(self.min_pow, self.max_pow());
        for (i, (c, m)) in self.coeffs.iter().zip(&self.mass).enumerate() {
            let pow = self.min_pow + i as i32;
            let mut lp = 1.0;
            let (mut v, mut mv) = (0.0, 0.0);
            for (a, b) in c.iter().zip(m) {
                v += a * lp;
                mv += b * lp;
                lp *= l2;
            }
            out.add_at(pow, v);
            // keep the mass of the lambda polynomial, not of its sum
            let idx = (pow - out.min_pow) as usize;
            out.mass[idx] = mv;
        }
        out
    }

    /// Regular part evaluated at `r`.
    fn eval(&self, lambda: f64, r: Complex64) -> Complex64 {
        let l2 = lambda * lambda;
        let start = (-self.min_pow).max(0) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs[start..].iter().rev() {
            let mut v = 0.0;
            for a in c.iter().rev() {
                v = v * l2 + a;
            }
            acc = acc * r + v;
        }
        acc
    }
}

impl PartialEq for RadialExpr {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.family == other.family && self.ladder == other.ladder && self.terms == other.terms
    }
}

fn family_for(flavor: Flavor) -> Family {
    match flavor {
        Flavor::Circular => Family::Cosh,
        Flavor::Hyperbolic => Family::Cos,
    }
}

/// Distance from `r` to the nearest singular point of `1/S` other than 0.
pub fn nonzero_pole_distance(flavor: Flavor, r: Complex64) -> f64 {
    let (x, unit) = match flavor {
        Flavor::Circular => (r.re, Complex64::new(PI, 0.0)),
        Flavor::Hyperbolic => (r.im, Complex64::new(0.0, PI)),
    };
    let m = (x / PI).round();
    [m - 1.0, m, m + 1.0]
        .into_iter()
        .filter(|k| *k != 0.0)
        .map(|k| (r - unit * k).norm())
        .fold(f64::INFINITY, f64::min)
}

impl RadialExpr {
    fn from_map(flavor: Flavor, family: Family, ladder: u32, terms: BTreeMap<(u32, u32), SymExpr>) -> Self {
        let terms = terms.into_iter().filter(|(_, b)| !b.is_zero()).collect();
        RadialExpr {
            flavor,
            family,
            ladder,
            terms,
            compiled: OnceLock::new(),
        }
    }

    /// `cosh(lambda r)` (circular) or `cos(lambda r)` (hyperbolic).
    pub fn euclid(flavor: Flavor) -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), SymExpr::one(flavor));
        RadialExpr::from_map(flavor, family_for(flavor), 0, m)
    }

    /// `phi_{lambda,k}(ir)` (circular) or `phi_{lambda,k}(r)` (hyperbolic).
    pub fn spherical(k: u32, flavor: Flavor) -> Result<Self> {
        let mut g = RadialExpr::euclid(flavor);
        let inv_s = SymExpr::sin_power(flavor, -1);
        for _ in 0..k {
            g = g.deriv().mul_sym(&inv_s)?;
        }
        if k == 0 {
            return Ok(g);
        }
        let sign = if flavor == Flavor::Hyperbolic && k % 2 == 1 { -1 } else { 1 };
        // Every term carries at least one lambda^2, which is d(lambda, 0).
        let terms = g
            .terms
            .into_iter()
            .map(|((p, j), b)| {
                debug_assert!(p >= 1);
                ((p - 1, j), b.scale(&Coeff::int(sign)))
            })
            .collect();
        Ok(RadialExpr::from_map(flavor, g.family, k, terms))
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn ladder(&self) -> u32 {
        self.ladder
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &SymExpr)> {
        self.terms.iter().map(|((p, j), b)| (*p, *j, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiply every coefficient by a symbolic factor (alias of `mul_sym`
    /// with the flavor check surfaced).
    pub fn times(&self, s: &SymExpr) -> Result<Self> {
        self.mul_sym(s)
    }

    fn compiled(&self) -> Arc<Compiled> {
        self.compiled
            .get_or_init(|| {
                let parts: Vec<_> = self.terms.iter().map(|((p, j), b)| (*p, *j, b.numeric())).collect();
                let jmax = parts.iter().map(|(_, j, _)| *j).max().unwrap_or(0);
                let has_poles = self.terms.values().any(|b| b.min_s_power() < 0);
                Arc::new(Compiled {
                    parts,
                    jmax,
                    has_poles,
                    origin: OnceLock::new(),
                })
            })
            .clone()
    }

    fn denominator(&self, lambda: f64) -> f64 {
        (1..self.ladder.max(1)).map(|m| ladder_d(lambda, m)).product()
    }

    /// Radius below which the origin expansion is used.
    fn series_radius(lambda: f64) -> f64 {
        SERIES_RADIUS.min(20.0 / lambda.abs().max(1e-300))
    }

    fn origin_poly(&self) -> Arc<Compiled> {
        let c = self.compiled();
        c.origin.get_or_init(|| {
            let len = SERIES_ORDER;
            let min_pow = c.parts.iter().map(|(_, _, n)| n.origin_series().min_pow).min().unwrap_or(0).min(0);
            let max_pow = len as i32 - 1;
            let rows = (max_pow - min_pow + 1) as usize;
            let half = len / 2 + 1 + (-min_pow).max(0) as usize;
            let emax = c.parts.iter().map(|(p, _, _)| *p as usize).max().unwrap_or(0) + half;
            let mut coeffs = vec![vec![0.0; emax + 1]; rows];
            let mut mass = vec![vec![0.0; emax + 1]; rows];
            for (p, j, num) in &c.parts {
                let b = num.origin_series();
                let taylor = special::taylor(self.family, *j, half);
                for (bi, bc) in b.coeffs.iter().enumerate() {
                    if *bc == 0.0 {
                        continue;
                    }
                    let kb = b.min_pow + bi as i32;
                    for (m, a) in taylor.iter().enumerate() {
                        let pow = kb + 2 * m as i32;
                        if pow > max_pow {
                            break;
                        }
                        let (row, e) = ((pow - min_pow) as usize, *p as usize + m);
                        coeffs[row][e] += bc * a;
                        mass[row][e] += (bc * a).abs();
                    }
                }
            }
            let scale = mass.iter().flatten().cloned().fold(0.0, f64::max);
            let regular_at_origin = (0..(-min_pow) as usize).all(|row| {
                coeffs[row]
                    .iter()
                    .zip(&mass[row])
                    .all(|(a, m)| a.abs() <= 1e-9 * m.max(scale * 1e-3) || *m == 0.0)
            });
            OriginPoly {
                min_pow,
                coeffs,
                mass,
                regular_at_origin,
            }
        });
        c
    }

    /// Combined Laurent expansion at the origin for a fixed `lambda`.
    pub fn origin_series(&self, lambda: f64) -> Laurent {
        self.origin_poly().origin.get().expect("initialised").at(lambda)
    }

    /// Evaluate at `(lambda, r)`.
    pub fn eval(&self, lambda: f64, r: Complex64) -> Result<Complex64> {
        let mut out = [Complex64::new(0.0, 0.0)];
        self.eval_many(&[lambda], r, &mut out)?;
        Ok(out[0])
    }

    /// Evaluate at one `r` for several `lambda`, sharing the `B` values.
    pub fn eval_many(&self, lambdas: &[f64], r: Complex64, out: &mut [Complex64]) -> Result<()> {
        let c = self.compiled();
        if c.has_poles {
            let d = nonzero_pole_distance(self.flavor, r);
            if d < DEFAULT_POLE_GUARD {
                return Err(Error::Pole {
                    at: r,
                    distance: d,
                    guard: DEFAULT_POLE_GUARD,
                });
            }
        }
        let mut bvals: Option<Vec<Complex64>> = None;
        for (slot, &lambda) in out.iter_mut().zip(lambdas) {
            if !lambda.is_finite() {
                return Err(Error::DegenerateLambda);
            }
            let lambda = lambda.abs();
            if c.has_poles && r.norm() < RadialExpr::series_radius(lambda) {
                let c = self.origin_poly();
                let origin = c.origin.get().expect("initialised");
                if origin.regular_at_origin {
                    *slot = origin.eval(lambda, r) / self.denominator(lambda);
                    continue;
                }
                if r.norm() < DEFAULT_POLE_GUARD {
                    return Err(Error::Pole {
                        at: r,
                        distance: r.norm(),
                        guard: DEFAULT_POLE_GUARD,
                    });
                }
            }
            let b = bvals.get_or_insert_with(|| c.parts.iter().map(|(_, _, n)| n.eval_closed(r)).collect());
            let f = special::family_values(self.family, r * lambda, c.jmax);
            let l2 = lambda * lambda;
            let mut acc = Complex64::new(0.0, 0.0);
            for ((p, j, _), bv) in c.parts.iter().zip(b.iter()) {
                acc += bv * f[*j as usize] * l2.powi(*p as i32);
            }
            *slot = acc / self.denominator(lambda);
        }
        Ok(())
    }
}

impl Radial for RadialExpr {
    fn deriv(&self) -> Self {
        let mut m: BTreeMap<(u32, u32), SymExpr> = BTreeMap::new();
        let r = SymExpr::r_power(self.flavor, 1);
        let mut put = |key: (u32, u32), e: SymExpr| {
            let merged = match m.remove(&key) {
                Some(old) => old.add(&e).expect("same flavor"),
                None => e,
            };
            m.insert(key, merged);
        };
        for ((p, j), b) in &self.terms {
            put((*p, *j), b.differentiate());
            put((p + 1, j + 1), b.multiply(&r).expect("same flavor"));
        }
        RadialExpr::from_map(self.flavor, self.family, self.ladder, m)
    }

    fn mul_sym(&self, s: &SymExpr) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (k, b) in &self.terms {
            m.insert(*k, b.multiply(s)?);
        }
        Ok(RadialExpr::from_map(self.flavor, self.family, self.ladder, m))
    }

    fn add(&self, other: &Self) -> Result<Self> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch);
        }
        if self.family != other.family || self.ladder != other.ladder {
            return Err(Error::InvalidParameter("cannot add spherical expressions with different normalisations".into()));
        }
        let mut m = self.terms.clone();
        for (k, b) in &other.terms {
            let merged = match m.remove(k) {
                Some(old) => old.add(b)?,
                None => b.clone(),
            };
            m.insert(*k, merged);
        }
        Ok(RadialExpr::from_map(self.flavor, self.family, self.ladder, m))
    }

    fn scale(&self, c: &Coeff) -> Self {
        let m = self.terms.iter().map(|(k, b)| (*k, b.scale(c))).collect();
        RadialExpr::from_map(self.flavor, self.family, self.ladder, m)
    }
}

/// All closed forms attached to one `k`.
#[derive(Debug)]
pub struct SphericalEval {
    pub k: u32,
    /// `phi_{lambda,k}(ir)`.
    pub imag: RadialExpr,
    /// `phi_{lambda,k}(r)`.
    pub real: RadialExpr,
    /// `D~* cosh(lambda r)`, which equals `c(lambda,k) phi_{lambda,k}(ir)`.
    pub star_of_cosh: RadialExpr,
    /// `D~ [phi_{lambda,k}(i.)]`, which equals `cosh(lambda r)`.
    pub dtilde_of_phi: RadialExpr,
    /// `D [phi_{lambda,k}]`, which equals `cos(lambda r)`.
    pub d_of_phi: RadialExpr,
}

impl SphericalEval {
    pub fn new(k: u32) -> Result<Self> {
        let imag = RadialExpr::spherical(k, Flavor::Circular)?;
        let real = RadialExpr::spherical(k, Flavor::Hyperbolic)?;
        let star_of_cosh = shift::d_star(&RadialExpr::euclid(Flavor::Circular), k, Flavor::Circular)?;
        let dtilde_of_phi = shift::d_op(&imag, k, Flavor::Circular)?;
        let d_of_phi = shift::d_op(&real, k, Flavor::Hyperbolic)?;
        Ok(SphericalEval {
            k,
            imag,
            real,
            star_of_cosh,
            dtilde_of_phi,
            d_of_phi,
        })
    }

    pub fn phi_i(&self, lambda: f64, r: Complex64) -> Result<Complex64> {
        self.imag.eval(lambda, r)
    }

    pub fn phi_real(&self, lambda: f64, r: f64) -> Result<f64> {
        Ok(self.real.eval(lambda, Complex64::new(r, 0.0))?.re)
    }

    /// `(d/dr)^l phi_{lambda,k}(ir)` as an expression.
    pub fn imag_derivative(&self, l: u32) -> RadialExpr {
        (0..l).fold(self.imag.clone(), |e, _| e.deriv())
    }
}

/// Shared, lazily built evaluator for `k`.
pub fn spherical(k: u32) -> Arc<SphericalEval> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<SphericalEval>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(e) = cache.lock().expect("cache poisoned").get(&k) {
        return e.clone();
    }
    let built = Arc::new(SphericalEval::new(k).expect("flavors are consistent by construction"));
    cache.lock().expect("cache poisoned").entry(k).or_insert(built).clone()
}

/// `phi_{lambda,k}(ir)`.
pub fn phi_i(lambda: f64, k: u32, r: Complex64) -> Result<Complex64> {
    spherical(k).phi_i(lambda, r)
}

/// `phi_{lambda,k}(r)` for real `r >= 0`.
pub fn phi_real(lambda: f64, k: u32, r: f64) -> Result<f64> {
    spherical(k).phi_real(lambda, r)
}

/// `(D~ phi_{lambda,n}(i.))(r)`.
pub fn apply_dtilde_to_phi(lambda: f64, n: u32, r: Complex64) -> Result<Complex64> {
    spherical(n).dtilde_of_phi.eval(lambda, r)
}

/// `(D~* cosh(lambda .))(r)`.
pub fn apply_dtilde_star_to_cosh(lambda: f64, n: u32, r: Complex64) -> Result<Complex64> {
    spherical(n).star_of_cosh.eval(lambda, r)
}

/// Right side of the spherical-function estimate:
/// `C (1+|r|) / (1+|lambda|)^{n-l-1} * (e^{|lambda r|} - 1)/|lambda r|`.
pub fn estimate_rhs(lambda: f64, r: Complex64, l: u32, n: u32, constant: f64) -> f64 {
    let x = (lambda * r).norm();
    let growth = if x == 0.0 { 1.0 } else { x.exp_m1() / x };
    constant * (1.0 + r.norm()) * (1.0 + lambda.abs()).powi(l as i32 + 1 - n as i32) * growth
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn base_cases() {
        for r in [z(0.0, 0.0), z(0.7, 0.1), z(2.3, -0.4)] {
            for lambda in [0.0, 0.5, 2.5] {
                let v = phi_i(lambda, 0, r).unwrap();
                assert!((v - (r * lambda).cosh()).norm() < 1e-14);
            }
        }
        let v = phi_i(1.0, 1, z(PI / 2.0, 0.0)).unwrap();
        assert!((v.re - (PI / 2.0).sinh()).abs() < 1e-14);
        assert!((v.re - 2.301_298_902_307_294_7).abs() < 1e-12);
    }

    #[test]
    fn k1_closed_forms() {
        for lambda in [0.0, 0.3, 1.0, 4.0] {
            for r in [z(0.05, 0.0), z(0.4, 0.2), z(1.3, 0.5), z(4.0, 0.3)] {
                let v = phi_i(lambda, 1, r).unwrap();
                let sx = if lambda == 0.0 { Complex64::new(1.0, 0.0) } else { (r * lambda).sinh() / (r * lambda) };
                let w = sx * r / r.sin();
                assert!((v - w).norm() <= 1e-13 * w.norm(), "lambda={lambda} r={r}");
            }
            for r in [0.01, 0.3, 1.0, 5.0] {
                let v = phi_real(lambda, 1, r).unwrap();
                let sx = if lambda == 0.0 { 1.0 } else { (lambda * r).sin() / (lambda * r) };
                let w = sx * r / r.sinh();
                assert!((v - w).abs() <= 1e-13, "lambda={lambda} r={r}");
            }
        }
    }

    #[test]
    fn normalisation_at_origin() {
        for k in 0..4 {
            for lambda in [0.0, 0.7, 3.0] {
                assert!((phi_i(lambda, k, z(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
                assert!((phi_real(lambda, k, 0.0).unwrap() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ladder_constants() {
        assert_eq!(ladder_d(1.0, 0), 1.0);
        assert!((ladder_c(1.0, 1) + 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!((ladder_c(2.0, 2) - 4.0 * 5.0 / 3.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((ladder_c(2.0, 2) - 0.168_868_639).abs() < 1e-8);
    }

    #[test]
    fn dtilde_examples() {
        let v = apply_dtilde_to_phi(1.0, 1, z(0.9, 0.2)).unwrap();
        assert!((v - z(0.9, 0.2).cosh()).norm() < 1e-13);
        let v = apply_dtilde_to_phi(0.0, 1, z(1.9, 0.0)).unwrap();
        assert!((v - 1.0).norm() < 1e-13);
        let v = apply_dtilde_to_phi(1.7, 2, z(2.1, 0.0)).unwrap();
        assert!((v.re - (1.7f64 * 2.1).cosh()).abs() <= 1e-10);
        assert_eq!(apply_dtilde_star_to_cosh(0.0, 1, z(1.0, 0.0)).unwrap(), z(0.0, 0.0));
    }

    #[test]
    fn estimate_rhs_substitution() {
        let b = estimate_rhs(1.0, z(1.0, 0.0), 0, 1, 1.0);
        assert!((b - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-15);
    }
}

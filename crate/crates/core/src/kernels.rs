//! Heat kernels of `R`, `H^{2n+1}` and `S^{2n+1}`, the unwrapped kernel
//! `nu_t`, and the shift operators acting on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate_real, Tolerance};
use crate::shift::{self, Intertwining, Radial};
use crate::spherical::RadialExpr;
use crate::trigexpr::{rate_for_time, Coeff, Flavor, SymExpr};

/// Dimension data for `H^{2n+1}` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub t: f64,
}

impl ModelParams {
    pub fn new(n: u32, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
        }
        Ok(ModelParams { n, t })
    }

    pub fn dim(&self) -> u32 {
        2 * self.n + 1
    }

    /// `|delta| = n`.
    pub fn delta(&self) -> f64 {
        self.n as f64
    }

    pub fn flat_dim(&self) -> u32 {
        1
    }

    pub fn c_n(&self) -> f64 {
        shift::surface_constant(self.n).to_f64()
    }

    pub fn c_n_exact(&self) -> Coeff {
        shift::surface_constant(self.n)
    }
}

/// `e^{t n^2 / 2}`.
pub fn heat_factor(t: f64, n: u32) -> f64 {
    (0.5 * t * (n * n) as f64).exp()
}

/// `(2 pi t)^{-1/2} e^{-r^2/(2t)}` in the given flavor.
pub fn euclid_gaussian(t: f64, flavor: Flavor) -> Result<SymExpr> {
    let rate = rate_for_time(t)?;
    let norm = Coeff::from_f64((2.0 * PI * t).sqrt().recip()).expect("finite");
    Ok(SymExpr::gaussian(flavor, rate).scale(&norm))
}

/// Unwrapped heat kernel `nu_t = e^{tn^2/2} L^n g_t` (circular).
pub fn nu(t: f64, n: u32) -> Result<SymExpr> {
    let g = euclid_gaussian(t, Flavor::Circular)?;
    Ok(shift::d_star(&g, n, Flavor::Circular)?.scale(&Coeff::from_f64(heat_factor(t, n)).expect("finite")))
}

/// Heat kernel of `H^{2n+1}`: `gamma_t = e^{-tn^2/2} L_h^n g_t`.
pub fn gamma(t: f64, n: u32) -> Result<SymExpr> {
    let g = euclid_gaussian(t, Flavor::Hyperbolic)?;
    Ok(shift::d_star(&g, n, Flavor::Hyperbolic)?.scale(&Coeff::from_f64(heat_factor(t, n).recip()).expect("finite")))
}

/// `w_t = e^{t n^2} g_{2t}`, chosen so that `L^n w_t = nu_{2t}`.
pub fn w(t: f64, n: u32) -> Result<SymExpr> {
    let g = euclid_gaussian(2.0 * t, Flavor::Circular)?;
    Ok(g.scale(&Coeff::from_f64(heat_factor(2.0 * t, n)).expect("finite")))
}

/// Heat kernel of `S^{2n+1}` as a truncated periodisation of `nu_t`.
#[derive(Debug, Clone)]
pub struct Periodized {
    pub nu: SymExpr,
    /// `nu_t * sin^{2n}`, which has no poles.
    pub nu_weighted: SymExpr,
    pub wraps: u32,
    pub t: f64,
}

impl Periodized {
    pub fn new(t: f64, n: u32, wraps: u32) -> Result<Self> {
        if wraps < 3 {
            return Err(Error::InvalidParameter(format!("wrap count must be at least 3, got {wraps}")));
        }
        let nu = nu(t, n)?;
        let nu_weighted = nu.multiply(&SymExpr::sin_power(Flavor::Circular, 2 * n as i32))?;
        Ok(Periodized { nu, nu_weighted, wraps, t })
    }

    fn shifts(&self) -> impl Iterator<Item = f64> {
        let k = self.wraps as i64;
        (-k..=k).map(|j| 2.0 * PI * j as f64)
    }

    /// `sum_{|j| <= K} nu_t(r - 2 pi j)`.
    pub fn eval(&self, r: Complex64) -> Result<Complex64> {
        self.shifts().map(|s| self.nu.evaluate(r - s)).sum()
    }

    /// `rho_t(r) sin^{2n} r`, pole-free on the real line.
    pub fn eval_weighted(&self, r: f64) -> Result<f64> {
        self.shifts().map(|s| self.nu_weighted.evaluate_real(r - s)).sum()
    }

    /// Gaussian bound on the discarded wraps, `e^{-(2 pi K - pi)^2/(2t)}`.
    pub fn tail_bound(&self) -> f64 {
        let d = 2.0 * PI * self.wraps as f64 - PI;
        (-d * d / (2.0 * self.t)).exp()
    }
}

/// Heat kernel of `S^{2n+1}` (`n >= 1`) from its zonal eigenfunction
/// expansion, normalised against `c_n sin^{2n} r dr`:
/// `vol^{-1} sum_k e^{-t k(k+2n)/2} ((k+n)/n) C_k^n(cos r)`.
pub fn sphere_heat_series(t: f64, n: u32, r: f64) -> Result<f64> {
    if n == 0 || !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1 and t > 0, got n = {n}, t = {t}")));
    }
    let nf = n as f64;
    let vol = ModelParams::new(n, t)?.c_n() * (0..n).fold(PI, |acc, j| acc * (2 * j + 1) as f64 / (2 * j + 2) as f64);
    let x = r.cos();
    let (mut prev, mut cur) = (1.0, 2.0 * nf * x);
    let mut sum = 1.0;
    // |C_k^n(x)| <= C_k^n(1), which grows polynomially
    let mut at_one = 2.0 * nf;
    for k in 1..100_000u32 {
        let kf = k as f64;
        let damp = (-t * kf * (kf + 2.0 * nf) / 2.0).exp();
        sum += damp * (kf + nf) / nf * cur;
        if damp * (kf + nf) / nf * at_one < 1e-18 * sum.abs() {
            return Ok(sum / vol);
        }
        let j = kf + 1.0;
        let next = (2.0 * x * (j + nf - 1.0) * cur - (j + 2.0 * nf - 2.0) * prev) / j;
        prev = cur;
        cur = next;
        at_one *= (kf + 2.0 * nf) / (kf + 1.0);
    }
    Err(Error::NonConvergence(format!("sphere heat series at t = {t}")))
}

/// Everything built from one `(n, t)`.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub params: ModelParams,
    pub euclid: SymExpr,
    pub nu_t: SymExpr,
    pub gamma_t: SymExpr,
    pub w_t: SymExpr,
    pub rho_t: Periodized,
}

pub fn build_kernels(p: ModelParams, wraps: u32) -> Result<KernelSet> {
    Ok(KernelSet {
        params: p,
        euclid: euclid_gaussian(p.t, Flavor::Circular)?,
        nu_t: nu(p.t, p.n)?,
        gamma_t: gamma(p.t, p.n)?,
        w_t: w(p.t, p.n)?,
        rho_t: Periodized::new(p.t, p.n, wraps)?,
    })
}

/// Which kernel a caller wants by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Nu,
    Gamma,
    Rho,
    W,
}

impl KernelKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nu" => Ok(KernelKind::Nu),
            "gamma" => Ok(KernelKind::Gamma),
            "rho" => Ok(KernelKind::Rho),
            "w" => Ok(KernelKind::W),
            other => Err(Error::Parse(format!("unknown kernel {other:?}"))),
        }
    }
}

impl KernelSet {
    pub fn eval(&self, kind: KernelKind, r: Complex64) -> Result<Complex64> {
        match kind {
            KernelKind::Nu => self.nu_t.evaluate(r),
            KernelKind::Gamma => self.gamma_t.evaluate(r),
            KernelKind::W => self.w_t.evaluate(r),
            KernelKind::Rho => self.rho_t.eval(r),
        }
    }
}

/// Apply `D` (hyperbolic) or `D~` (circular) to a callable at `r`.
///
/// Derivatives come from a Cauchy jet on a circle of radius `rho` around
/// `r`, which must avoid the singularities of `f`.
pub fn apply_shift_d<F>(f: F, n: u32, r: Complex64, flavor: Flavor, rho: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    shift::apply_d_callable(f, n, r, flavor, rho)
}

/// A radial expression that can also be evaluated.
pub trait RadialFn: Radial {
    fn value(&self, r: Complex64) -> Result<Complex64>;
}

impl RadialFn for SymExpr {
    fn value(&self, r: Complex64) -> Result<Complex64> {
        self.evaluate(r)
    }
}

/// A spherical-type expression frozen at one spectral parameter.
#[derive(Debug, Clone)]
pub struct AtLambda {
    pub expr: RadialExpr,
    pub lambda: f64,
}

impl Radial for AtLambda {
    fn deriv(&self) -> Self {
        AtLambda {
            expr: self.expr.deriv(),
            lambda: self.lambda,
        }
    }
    fn mul_sym(&self, s: &SymExpr) -> Result<Self> {
        Ok(AtLambda {
            expr: self.expr.mul_sym(s)?,
            lambda: self.lambda,
        })
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(AtLambda {
            expr: self.expr.add(&other.expr)?,
            lambda: self.lambda,
        })
    }
    fn scale(&self, c: &Coeff) -> Self {
        AtLambda {
            expr: self.expr.scale(c),
            lambda: self.lambda,
        }
    }
}

impl RadialFn for AtLambda {
    fn value(&self, r: Complex64) -> Result<Complex64> {
        self.expr.eval(self.lambda, r)
    }
}

/// Boundary terms and shifted bulk integrand of
/// `c_n int_0^R f (D* g) S^{2n} = sum_k B_k + 2 int_0^R (D f) g`.
#[derive(Debug, Clone)]
pub struct Adjoint<F> {
    /// `B_k` for `k = 0..n`, from the integration by parts at level `k+1`.
    pub boundary: Vec<Complex64>,
    /// `2 (D f) g`.
    pub bulk: F,
}

impl<F> Adjoint<F> {
    pub fn boundary_sum(&self) -> Complex64 {
        self.boundary.iter().sum()
    }
}

/// `B_k = -(c_k/(2k+1)) S^{2k+1}(R) f_k(R) (L^k g)(R)` with
/// `f_k = M_{k+1} ... M_{n-1} f`.
pub fn adjoint_decompose<F: RadialFn>(f: &F, g: &SymExpr, r_end: Complex64, n: u32, flavor: Flavor) -> Result<Adjoint<F>> {
    if g.flavor() != flavor {
        return Err(Error::FlavorMismatch);
    }
    let s = match flavor {
        Flavor::Circular => r_end.sin(),
        Flavor::Hyperbolic => r_end.sinh(),
    };
    let mut boundary = Vec::with_capacity(n as usize);
    let mut lg = g.clone();
    for k in 0..n {
        let fk = shift::partial_d(f, n, k, flavor)?;
        let ck = shift::surface_constant(k).to_f64() / (2 * k + 1) as f64;
        let v = -ck * s.powi(2 * k as i32 + 1) * fk.value(r_end)? * lg.evaluate(r_end)?;
        boundary.push(v);
        lg = lg.apply_l();
    }
    let bulk = shift::d_op(f, n, flavor)?.mul_sym(g)?.scale(&Coeff::int(2));
    Ok(Adjoint { boundary, bulk })
}

/// Sample grid used by [`verify_intertwining`].
pub fn intertwining_grid() -> Vec<Complex64> {
    (0..30)
        .map(|i| {
            let x = 0.2 + 2.6 * i as f64 / 29.0;
            Complex64::new(x, 0.0)
        })
        .collect()
}

/// `max |lhs - rhs|` of an intertwining identity applied to `f` over
/// [`intertwining_grid`].
pub fn verify_intertwining<F: RadialFn>(which: Intertwining, f: &F, n: u32) -> Result<f64> {
    let (lhs, rhs) = which.sides(f, n)?;
    let mut worst: f64 = 0.0;
    for r in intertwining_grid() {
        worst = worst.max((lhs.value(r)? - rhs.value(r)?).norm());
    }
    Ok(worst)
}

/// `c_n int_0^R gamma_t sinh^{2n}` with `R = 10 sqrt(t) + 10 t n`, and a
/// bound on the discarded tail.
pub fn hyperbolic_mass(p: ModelParams) -> Result<(f64, f64)> {
    let g = gamma(p.t, p.n)?.multiply(&SymExpr::sin_power(Flavor::Hyperbolic, 2 * p.n as i32))?;
    let cut = 10.0 * p.t.sqrt() + 10.0 * p.t * p.n as f64;
    let num = g.numeric();
    let (v, err) = integrate_real(0.0, cut, |r| num.eval_closed(Complex64::new(r, 0.0)).re, Tolerance::new(1e-15, 1e-13))?;
    // Past the cut the integrand decays faster than exp(-(r - cut)^2/(2t) - (cut/t - 2n)(r - cut)).
    let edge = num.eval_closed(Complex64::new(cut, 0.0)).re.abs();
    let slope = cut / p.t - 2.0 * p.n as f64 - (p.n as f64 + 1.0);
    let tail = if slope > 0.0 { edge / slope } else { f64::INFINITY };
    Ok((p.c_n() * v, p.c_n() * (tail + err)))
}

/// `c_n int_0^pi rho_t sin^{2n}` with the wrap and quadrature error.
pub fn spherical_mass(p: ModelParams, wraps: u32) -> Result<(f64, f64)> {
    let rho = Periodized::new(p.t, p.n, wraps)?;
    let mut failure = None;
    let (v, err) = integrate_real(
        0.0,
        PI,
        |r| match rho.eval_weighted(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        Tolerance::new(1e-15, 1e-13),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((p.c_n() * v, p.c_n() * (err + PI * rho.tail_bound())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::Intertwining;
    use crate::spherical::RadialExpr;

    fn z(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn n0_is_the_gaussian() {
        let k = build_kernels(ModelParams::new(0, 0.7).unwrap(), 8).unwrap();
        assert_eq!(k.nu_t, k.euclid);
    }

    #[test]
    fn n1_closed_forms() {
        let t = 0.8;
        let k = build_kernels(ModelParams::new(1, t).unwrap(), 8).unwrap();
        for r in [0.0f64, 0.4, 1.3, 2.9] {
            let ratio = if r == 0.0 { 1.0 } else { r / r.sin() };
            let v = (t / 2.0).exp() * (2.0 * PI * t).powf(-0.5) / (2.0 * PI * t) * ratio * (-r * r / (2.0 * t)).exp();
            assert!((k.nu_t.evaluate_real(r).unwrap() - v).abs() < 1e-13 * v.abs());
            let hr = if r == 0.0 { 1.0 } else { r / r.sinh() };
            let h = (-t / 2.0).exp() * (2.0 * PI * t).powf(-1.5) * hr * (-r * r / (2.0 * t)).exp();
            assert!((k.gamma_t.evaluate_real(r).unwrap() - h).abs() < 1e-13 * h.abs());
        }
    }

    #[test]
    fn nu_at_half_pi() {
        let v = nu(1.0, 1).unwrap().evaluate_real(PI / 2.0).unwrap();
        let w = 0.5f64.exp() / (2.0 * PI) * (PI / 2.0) * (2.0 * PI).powf(-0.5) * (-PI * PI / 8.0).exp();
        assert!((v - w).abs() < 1e-15);
    }

    #[test]
    fn dtilde_star_of_w_is_nu_2t() {
        for n in 0..4 {
            for t in [0.5, 1.0, 0.3] {
                let lhs = shift::d_star(&w(t, n).unwrap(), n, Flavor::Circular).unwrap();
                assert_eq!(lhs, nu(2.0 * t, n).unwrap());
            }
        }
    }

    #[test]
    fn pole_orders_of_nu() {
        for n in 1..=3u32 {
            let e = nu(1.0, n).unwrap();
            for m in [1, 2, -1] {
                assert_eq!(e.pole_order_at(m).unwrap(), 2 * n - 1);
            }
            assert!(e.is_even());
        }
    }

    #[test]
    fn one_step_boundary_term() {
        let one = SymExpr::one(Flavor::Circular);
        let r = z(1.3);
        let adj = adjoint_decompose(&one, &one, r, 1, Flavor::Circular).unwrap();
        assert!((adj.boundary[0] + 2.0 * r.sin()).norm() < 1e-15);
        // 0 = B + 2 sin R
        let bulk = adj.bulk.evaluate(r).unwrap();
        assert!((bulk - 2.0 * r.cos()).norm() < 1e-15);
    }

    #[test]
    fn shift_d_at_origin_of_gaussian() {
        for n in 1..=3 {
            let g = euclid_gaussian(0.6, Flavor::Hyperbolic).unwrap();
            let v = apply_shift_d(|r| g.evaluate(r), n, z(0.0), Flavor::Hyperbolic, 0.25).unwrap();
            assert!((v - g.evaluate(z(0.0)).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn intertwining_on_cosh_and_gaussian() {
        let f = AtLambda {
            expr: RadialExpr::euclid(Flavor::Circular),
            lambda: 0.8,
        };
        for n in 1..=3 {
            assert!(verify_intertwining(Intertwining::DTildeStar, &f, n).unwrap() < 1e-9);
        }
        let g = euclid_gaussian(1.0, Flavor::Hyperbolic).unwrap();
        for n in 1..=3 {
            assert!(verify_intertwining(Intertwining::DStar, &g, n).unwrap() < 1e-9);
        }
    }
}

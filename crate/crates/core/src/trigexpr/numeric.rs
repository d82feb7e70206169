//! Floating-point form of a [`SymExpr`].

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{Flavor, SymExpr};
use crate::error::{Error, Result};
use crate::series::{self, Laurent};

/// Default distance to a pole below which evaluation is refused.
pub const DEFAULT_POLE_GUARD: f64 = 1e-8;
/// Number of Laurent coefficients kept for the expansion at the origin.
pub const SERIES_ORDER: usize = 64;
/// Below this modulus the origin expansion replaces the closed form.
pub const SERIES_RADIUS: f64 = 0.5;

const PRINCIPAL_REL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct NumTerm {
    coeff: f64,
    rate: f64,
    p: i32,
    s: i32,
    q: i32,
}

/// Compiled expression: `f64` coefficients plus the expansion at `r = 0`.
#[derive(Debug, Clone)]
pub struct NumExpr {
    flavor: Flavor,
    terms: Vec<NumTerm>,
    has_poles: bool,
    origin: Laurent,
    origin_regular: bool,
    origin_poly: Vec<f64>,
}

/// Power series of `S(r)/r`, `C(r)` and `exp(-a r^2)` up to `len` terms.
fn base_series(flavor: Flavor, rate: f64, len: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let sign = match flavor {
        Flavor::Circular => -1.0,
        Flavor::Hyperbolic => 1.0,
    };
    let mut s_over_r = vec![0.0; len];
    let mut c = vec![0.0; len];
    let mut g = vec![0.0; len];
    // sin r / r = sum (-1)^k r^{2k}/(2k+1)!,  cos r = sum (-1)^k r^{2k}/(2k)!
    let mut fact_odd = 1.0; // (2k+1)!
    let mut fact_even = 1.0; // (2k)!
    let mut sgn = 1.0;
    let mut gk = 1.0;
    for k in 0..len.div_ceil(2) {
        let i = 2 * k;
        if i >= len {
            break;
        }
        s_over_r[i] = sgn / fact_odd;
        c[i] = sgn / fact_even;
        g[i] = gk;
        sgn *= sign;
        fact_even *= ((2 * k + 1) * (2 * k + 2)) as f64;
        fact_odd *= ((2 * k + 2) * (2 * k + 3)) as f64;
        gk *= -rate / (k + 1) as f64;
    }
    (s_over_r, c, g)
}

impl NumExpr {
    pub fn compile(e: &SymExpr) -> NumExpr {
        let terms: Vec<NumTerm> = e
            .terms()
            .map(|t| NumTerm {
                coeff: t.coeff.to_f64(),
                rate: t.gauss_rate.to_f64().unwrap_or(f64::NAN),
                p: t.r_power as i32,
                s: t.s_power,
                q: t.c_power as i32,
            })
            .collect();
        let has_poles = terms.iter().any(|t| t.s < 0);
        let origin = origin_laurent(e.flavor(), &terms, SERIES_ORDER);
        let origin_regular = origin.principal_part_vanishes(PRINCIPAL_REL);
        let origin_poly = origin.regular_part();
        NumExpr {
            flavor: e.flavor(),
            terms,
            has_poles,
            origin,
            origin_regular,
            origin_poly,
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Laurent expansion at the origin.
    pub fn origin_series(&self) -> &Laurent {
        &self.origin
    }

    /// Whether the expression is regular at `r = 0`.
    pub fn regular_at_origin(&self) -> bool {
        self.origin_regular
    }

    /// Distance from `r` to the nearest singular point other than the
    /// origin (when the origin is removable).
    pub fn pole_distance(&self, r: Complex64) -> f64 {
        if !self.has_poles {
            return f64::INFINITY;
        }
        let (x, unit) = match self.flavor {
            Flavor::Circular => (r.re, Complex64::new(PI, 0.0)),
            Flavor::Hyperbolic => (r.im, Complex64::new(0.0, PI)),
        };
        let m = (x / PI).round();
        let near = |m: f64| (r - unit * m).norm();
        let mut d = f64::INFINITY;
        for k in [m - 1.0, m, m + 1.0] {
            if k == 0.0 && self.origin_regular {
                continue;
            }
            d = d.min(near(k));
        }
        d
    }

    pub fn eval(&self, r: Complex64) -> Result<Complex64> {
        self.eval_guarded(r, DEFAULT_POLE_GUARD)
    }

    pub fn eval_guarded(&self, r: Complex64, guard: f64) -> Result<Complex64> {
        if self.has_poles {
            let d = self.pole_distance(r);
            if d < guard {
                return Err(Error::Pole {
                    at: r,
                    distance: d,
                    guard,
                });
            }
        }
        if self.has_poles && self.origin_regular && r.norm() < SERIES_RADIUS {
            return Ok(series::horner(&self.origin_poly, r));
        }
        Ok(self.eval_closed(r))
    }

    /// Closed-form evaluation with no guard and no series fallback.
    pub fn eval_closed(&self, r: Complex64) -> Complex64 {
        let (s, c) = match self.flavor {
            Flavor::Circular => (r.sin(), r.cos()),
            Flavor::Hyperbolic => (r.sinh(), r.cosh()),
        };
        let r2 = r * r;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut last_rate = f64::NAN;
        let mut g = Complex64::new(1.0, 0.0);
        for t in &self.terms {
            if t.rate != last_rate {
                g = (-t.rate * r2).exp();
                last_rate = t.rate;
            }
            let mut v = g * t.coeff;
            if t.p != 0 {
                v *= r.powi(t.p);
            }
            if t.s != 0 {
                v *= s.powi(t.s);
            }
            if t.q != 0 {
                v *= c.powi(t.q);
            }
            acc += v;
        }
        acc
    }
}

/// Rate and the `(u, c, g)` base series for that rate.
type BaseCache = Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>)>;

fn origin_laurent(flavor: Flavor, terms: &[NumTerm], len: usize) -> Laurent {
    let min_pow = terms.iter().map(|t| t.p + t.s).min().unwrap_or(0).min(0);
    let mut out = Laurent::zeros(min_pow, len as i32 - 1);
    let mut cache: BaseCache = None;
    for t in terms {
        let fresh = !matches!(&cache, Some((a, ..)) if *a == t.rate);
        if fresh {
            let (u, c, g) = base_series(flavor, t.rate, len + (-min_pow) as usize + 2);
            cache = Some((t.rate, u, c, g));
        }
        let (_, u, c, g) = cache.as_ref().expect("filled above");
        let width = (len as i32 - (t.p + t.s) + 1).max(1) as usize;
        let mut body = series::powi(u, t.s, width);
        if t.q > 0 {
            body = series::mul(&body, &series::powi(c, t.q, width), width);
        }
        if t.rate != 0.0 {
            body = series::mul(&body, g, width);
        }
        let shift = t.p + t.s;
        for (k, b) in body.iter().enumerate() {
            if *b != 0.0 {
                out.add_at(shift + k as i32, t.coeff * b);
            }
        }
    }
    out
}

/// Pole order at `m * pi` from a Laurent fit on a small circle.
pub(super) fn pole_order_at(e: &SymExpr, m: i64) -> Result<u32> {
    if e.flavor() != Flavor::Circular {
        return Err(Error::FlavorMismatch);
    }
    let num = e.numeric();
    if !num.has_poles {
        return Ok(0);
    }
    const N: usize = 64;
    const RHO: f64 = 1e-2;
    let center = Complex64::new(m as f64 * PI, 0.0);
    let samples: Vec<Complex64> = (0..N)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / N as f64;
            num.eval_closed(center + Complex64::from_polar(RHO, th))
        })
        .collect();
    // scaled coefficients a_j = c_j rho^j for j in -N/2 .. N/2
    let half = (N / 2) as i32;
    let scaled: Vec<(i32, Complex64)> = (-half..half)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, f) in samples.iter().enumerate() {
                let th = 2.0 * PI * k as f64 / N as f64;
                acc += f * Complex64::from_polar(1.0, -(j as f64) * th);
            }
            (j, acc / N as f64)
        })
        .collect();
    let top = scaled.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    let thresh = 1e-9 * top;
    let order = scaled
        .iter()
        .filter(|(j, a)| *j < 0 && a.norm() > thresh)
        .map(|(j, _)| (-j) as u32)
        .max()
        .unwrap_or(0);
    // Check the truncated fit off the sampling circle.
    let mut residual: f64 = 0.0;
    for k in 0..8 {
        let th = 2.0 * PI * (k as f64 + 0.5) / 8.0;
        let z = Complex64::from_polar(1.5, th);
        let fit: Complex64 = scaled
            .iter()
            .filter(|(j, _)| *j >= -(order as i32))
            .map(|(j, a)| a * z.powi(*j))
            .sum();
        let exact = num.eval_closed(center + z * RHO);
        residual = residual.max((fit - exact).norm() / exact.norm().max(top));
    }
    if residual > 1e-6 {
        return Err(Error::AmbiguousOrder { m, residual });
    }
    Ok(order)
}

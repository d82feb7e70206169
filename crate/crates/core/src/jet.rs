//! Truncated Taylor jets `sum_k a_k (r - r0)^k` with complex coefficients.
//!
//! Jets give derivatives of functions that are not available in closed
//! form: a callable is sampled on a small circle around `r0` and its Taylor
//! coefficients are read off by the Cauchy integral formula. Products with
//! elementary factors are then done in exact truncated-series arithmetic.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::trigexpr::{Flavor, SymExpr};

const CAUCHY_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub center: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(center: Complex64, v: Complex64, len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[0] = v;
        Jet { center, coeffs }
    }

    /// The identity function `r`.
    pub fn variable(center: Complex64, len: usize) -> Self {
        let mut j = Jet::constant(center, center, len);
        if len > 1 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Jet of a callable by the Cauchy integral formula on a circle of
    /// radius `rho`.
    pub fn from_fn<F>(f: F, center: Complex64, len: usize, rho: f64) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let m = CAUCHY_SAMPLES.max(2 * len);
        let mut samples = Vec::with_capacity(m);
        for k in 0..m {
            let z = center + Complex64::from_polar(rho, 2.0 * PI * k as f64 / m as f64);
            let v = f(z).map_err(|e| Error::DifferentiationFailure {
                at: z,
                reason: e.to_string(),
            })?;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::DifferentiationFailure {
                    at: z,
                    reason: "non-finite sample".into(),
                });
            }
            samples.push(v);
        }
        let coeffs = (0..len)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, v) in samples.iter().enumerate() {
                    acc += v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64);
                }
                acc / (m as f64 * rho.powi(j as i32))
            })
            .collect();
        Ok(Jet { center, coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs.first().copied().unwrap_or_default()
    }

    /// `k`-th derivative at the center.
    pub fn derivative_at(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs.get(k).copied().unwrap_or_default() * fact
    }

    pub fn deriv(&self) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a * k as f64)
            .collect();
        Jet {
            center: self.center,
            coeffs,
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let len = self.len().min(other.len());
        Jet {
            center: self.center,
            coeffs: (0..len).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            center: self.center,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let len = self.len().min(other.len());
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            for j in 0..len - i {
                out[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Jet {
            center: self.center,
            coeffs: out,
        }
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(Error::Pole {
                at: self.center,
                distance: 0.0,
                guard: 0.0,
            });
        }
        let len = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        out[0] = 1.0 / a0;
        for k in 1..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j];
            }
            out[k] = -acc / a0;
        }
        Ok(Jet {
            center: self.center,
            coeffs: out,
        })
    }

    pub fn powi(&self, e: i32) -> Result<Jet> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut out = Jet::constant(self.center, Complex64::new(1.0, 0.0), self.len());
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// `exp` of a jet.
    pub fn exp(&self) -> Jet {
        let len = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        out[0] = self.coeffs[0].exp();
        for k in 1..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j] * j as f64;
            }
            out[k] = acc / k as f64;
        }
        Jet {
            center: self.center,
            coeffs: out,
        }
    }

    /// Jets of `S` and `C` for the given flavor.
    pub fn trig(flavor: Flavor, center: Complex64, len: usize) -> (Jet, Jet) {
        let (s0, c0, sign) = match flavor {
            Flavor::Circular => (center.sin(), center.cos(), -1.0),
            Flavor::Hyperbolic => (center.sinh(), center.cosh(), 1.0),
        };
        // S^{(k)}: s, c, sign*s, sign*c, ...
        let mut s = Vec::with_capacity(len);
        let mut c = Vec::with_capacity(len);
        let mut fact = 1.0;
        let (mut ds, mut dc) = (s0, c0);
        for k in 0..len {
            if k > 0 {
                fact *= k as f64;
            }
            s.push(ds / fact);
            c.push(dc / fact);
            let (ns, nc) = (dc, ds * sign);
            ds = ns;
            dc = nc;
        }
        (Jet { center, coeffs: s }, Jet { center, coeffs: c })
    }

    /// Exact jet of a symbolic expression.
    pub fn of_sym(e: &SymExpr, center: Complex64, len: usize) -> Result<Jet> {
        let (s, c) = Jet::trig(e.flavor(), center, len);
        let r = Jet::variable(center, len);
        let r2 = r.mul(&r);
        let mut acc = Jet::constant(center, Complex64::new(0.0, 0.0), len);
        for t in e.terms() {
            let mut term = Jet::constant(center, Complex64::new(t.coeff.to_f64(), 0.0), len);
            let a = t.gauss_rate.to_f64().unwrap_or(f64::NAN);
            if a != 0.0 {
                term = term.mul(&r2.scale(Complex64::new(-a, 0.0)).exp());
            }
            if t.r_power > 0 {
                term = term.mul(&r.powi(t.r_power as i32)?);
            }
            if t.s_power != 0 {
                term = term.mul(&s.powi(t.s_power)?);
            }
            if t.c_power > 0 {
                term = term.mul(&c.powi(t.c_power as i32)?);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

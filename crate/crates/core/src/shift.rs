//! Shift operators and radial Laplacians, written once over [`Radial`].
//!
//! With `(S, C)` the flavor's sine and cosine:
//!
//! ```text
//!     L      = -(1/2pi) (1/S) d/dr
//!     D*     = L^n                                  (adjoint shift)
//!     M_k f  = (S f' + (2k+1) C f) / (2k+1)
//!     D      = M_0 M_1 ... M_{n-1}                  (M_{n-1} acts first)
//!     Lap_k  = d^2/dr^2 + 2k (C/S) d/dr
//! ```
//!
//! Hyperbolic flavor gives `D*` and `D`, circular flavor `D~*` and `D~`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::trigexpr::{Coeff, Flavor, SymExpr};

/// A radial function class closed under `d/dr`, sums, and products with
/// elementary factors.
pub trait Radial: Sized + Clone {
    fn deriv(&self) -> Self;
    fn mul_sym(&self, s: &SymExpr) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn scale(&self, c: &Coeff) -> Self;
}

impl Radial for SymExpr {
    fn deriv(&self) -> Self {
        self.differentiate()
    }
    fn mul_sym(&self, s: &SymExpr) -> Result<Self> {
        self.multiply(s)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        SymExpr::add(self, other)
    }
    fn scale(&self, c: &Coeff) -> Self {
        SymExpr::scale(self, c)
    }
}

impl Radial for Jet {
    fn deriv(&self) -> Self {
        Jet::deriv(self)
    }
    fn mul_sym(&self, s: &SymExpr) -> Result<Self> {
        Ok(self.mul(&Jet::of_sym(s, self.center, self.len())?))
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(Jet::add(self, other))
    }
    fn scale(&self, c: &Coeff) -> Self {
        Jet::scale(self, Complex64::new(c.to_f64(), 0.0))
    }
}

fn minus_inv_tau() -> Coeff {
    Coeff::tau_monomial(-BigRational::one(), -1)
}

/// `L f`.
pub fn apply_l<F: Radial>(f: &F, flavor: Flavor) -> Result<F> {
    Ok(f.deriv().mul_sym(&SymExpr::sin_power(flavor, -1))?.scale(&minus_inv_tau()))
}

/// `D* f = L^n f` (hyperbolic) or `D~* f` (circular).
pub fn d_star<F: Radial>(f: &F, n: u32, flavor: Flavor) -> Result<F> {
    let mut g = f.clone();
    for _ in 0..n {
        g = apply_l(&g, flavor)?;
    }
    Ok(g)
}

/// `M_k f = (S f' + (2k+1) C f)/(2k+1)`.
pub fn m_step<F: Radial>(f: &F, k: u32, flavor: Flavor) -> Result<F> {
    let a = f.deriv().mul_sym(&SymExpr::sin_power(flavor, 1))?;
    let b = f.mul_sym(&SymExpr::cos(flavor))?.scale(&Coeff::int(2 * k as i64 + 1));
    Ok(a.add(&b)?.scale(&Coeff::ratio(1, 2 * k as i64 + 1)))
}

/// `D f` (hyperbolic) or `D~ f` (circular).
pub fn d_op<F: Radial>(f: &F, n: u32, flavor: Flavor) -> Result<F> {
    let mut g = f.clone();
    for k in (0..n).rev() {
        g = m_step(&g, k, flavor)?;
    }
    Ok(g)
}

/// `f_k = M_{k+1} ... M_{n-1} f`: the state of the `f` side after the
/// integrations by parts down to level `k + 1`.
pub fn partial_d<F: Radial>(f: &F, n: u32, k: u32, flavor: Flavor) -> Result<F> {
    let mut g = f.clone();
    for j in ((k + 1)..n).rev() {
        g = m_step(&g, j, flavor)?;
    }
    Ok(g)
}

/// `Lap_k f = f'' + 2k (C/S) f'`.
pub fn radial_laplacian<F: Radial>(f: &F, k: u32, flavor: Flavor) -> Result<F> {
    let d1 = f.deriv();
    let d2 = d1.deriv();
    let cot = SymExpr::cos(flavor).multiply(&SymExpr::sin_power(flavor, -1))?;
    d2.add(&d1.mul_sym(&cot)?.scale(&Coeff::int(2 * k as i64)))
}

/// `f'' + shift * f`.
pub fn euclid_shifted<F: Radial>(f: &F, shift: i64) -> Result<F> {
    f.deriv().deriv().add(&f.scale(&Coeff::int(shift)))
}

/// `c_n = 2 (2 pi)^n / (2n-1)!!`, the area of the unit sphere in `R^{2n+1}`.
pub fn surface_constant(n: u32) -> Coeff {
    let df: i64 = (1..=n as i64).map(|k| 2 * k - 1).product();
    Coeff::tau_monomial(BigRational::new(BigInt::from(2), BigInt::from(df)), n as i32)
}

/// Intertwining residual functions for the four identities.
///
/// Returns `(lhs, rhs)` for
///
/// * `D*`:  `Lap_n D* f` vs `D* (f'' - n^2 f)` (hyperbolic),
/// * `D~*`: `Lap_n D~* f` vs `D~* (f'' + n^2 f)` (circular),
/// * `D`:   `D Lap_n f` vs `(d^2 - n^2) D f` (hyperbolic),
/// * `D~`:  `D~ Lap_n f` vs `(d^2 + n^2) D~ f` (circular).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intertwining {
    DStar,
    DTildeStar,
    D,
    DTilde,
}

impl Intertwining {
    pub fn flavor(self) -> Flavor {
        match self {
            Intertwining::DStar | Intertwining::D => Flavor::Hyperbolic,
            Intertwining::DTildeStar | Intertwining::DTilde => Flavor::Circular,
        }
    }

    fn euclid_shift(self, n: u32) -> i64 {
        let n2 = (n * n) as i64;
        match self.flavor() {
            Flavor::Hyperbolic => -n2,
            Flavor::Circular => n2,
        }
    }

    pub fn sides<F: Radial>(self, f: &F, n: u32) -> Result<(F, F)> {
        let fl = self.flavor();
        let shift = self.euclid_shift(n);
        match self {
            Intertwining::DStar | Intertwining::DTildeStar => {
                let lhs = radial_laplacian(&d_star(f, n, fl)?, n, fl)?;
                let rhs = d_star(&euclid_shifted(f, shift)?, n, fl)?;
                Ok((lhs, rhs))
            }
            Intertwining::D | Intertwining::DTilde => {
                let lhs = d_op(&radial_laplacian(f, n, fl)?, n, fl)?;
                let rhs = euclid_shifted(&d_op(f, n, fl)?, shift)?;
                Ok((lhs, rhs))
            }
        }
    }
}

/// Apply `D` (hyperbolic) or `D~` (circular) to a callable at `r`, using
/// a Cauchy jet of radius `rho` around `r`.
pub fn apply_d_callable<F>(f: F, n: u32, r: Complex64, flavor: Flavor, rho: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("jet radius must be positive, got {rho}")));
    }
    let jet = Jet::from_fn(f, r, n as usize + 4, rho)?;
    Ok(d_op(&jet, n, flavor)?.value())
}

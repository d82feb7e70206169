//! Entire families `f_j(x) = (x^{-1} d/dx)^j f_0(x)` with `f_0 = cosh` or `cos`.
//!
//! These carry all the spectral-parameter dependence of the spherical
//! functions: `d/dr f_j(lambda r) = lambda^2 r f_{j+1}(lambda r)`.

use num_complex::Complex64;

/// Which entire family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `f_0 = cosh`.
    Cosh,
    /// `f_0 = cos`.
    Cos,
}

impl Family {
    pub fn sigma(self) -> f64 {
        match self {
            Family::Cosh => 1.0,
            Family::Cos => -1.0,
        }
    }
}

/// Taylor coefficients `a_m` with `f_j(x) = sum_m a_m x^{2m}`, `m < len`.
pub fn taylor(family: Family, j: u32, len: usize) -> Vec<f64> {
    let sigma = family.sigma();
    let mut out = Vec::with_capacity(len);
    // a_0 = sigma^j / (2j-1)!!
    let mut a = sigma.powi(j as i32) / double_factorial_odd(j);
    for m in 0..len {
        out.push(a);
        a *= sigma / (2.0 * (m as f64 + 1.0) * (2.0 * (m + j as usize) as f64 + 1.0));
    }
    out
}

/// `(2j-1)!!`, with `(-1)!! = 1`.
pub fn double_factorial_odd(j: u32) -> f64 {
    (1..=j).map(|k| (2 * k - 1) as f64).product()
}

fn series_eval(family: Family, j: u32, x: Complex64) -> Complex64 {
    let x2 = x * x;
    let sigma = family.sigma();
    let mut term = Complex64::new(sigma.powi(j as i32) / double_factorial_odd(j), 0.0);
    let mut acc = term;
    for m in 0..200usize {
        term *= x2 * (sigma / (2.0 * (m as f64 + 1.0) * (2.0 * (m + j as usize) as f64 + 1.0)));
        acc += term;
        if term.norm() <= 1e-17 * acc.norm() {
            break;
        }
    }
    acc
}

/// Values `f_0(x), ..., f_jmax(x)`.
pub fn family_values(family: Family, x: Complex64, jmax: u32) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(jmax as usize + 1);
    if x.norm() <= (jmax as f64 + 2.0).max(2.0) {
        for j in 0..=jmax {
            out.push(series_eval(family, j, x));
        }
        return out;
    }
    let sigma = family.sigma();
    let (f0, f1) = match family {
        Family::Cosh => (x.cosh(), x.sinh() / x),
        Family::Cos => (x.cos(), -x.sin() / x),
    };
    out.push(f0);
    if jmax >= 1 {
        out.push(f1);
    }
    let x2 = x * x;
    for j in 0..jmax.saturating_sub(1) {
        let fj = out[j as usize];
        let fj1 = out[j as usize + 1];
        out.push((fj * sigma - fj1 * (2 * j + 1) as f64) / x2);
    }
    out
}

/// Single value `f_j(x)`.
pub fn family_value(family: Family, j: u32, x: Complex64) -> Complex64 {
    family_values(family, x, j)[j as usize]
}

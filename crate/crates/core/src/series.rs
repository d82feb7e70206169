//! Truncated power series with real coefficients.
//!
//! Used for the removable-singularity fallback at the origin: every
//! expression class in the crate has a Laurent expansion at `r = 0` whose
//! principal part cancels, and near the origin we evaluate the regular part
//! instead of the cancelling closed form.

use num_complex::Complex64;

/// Product of two truncated series, keeping `len` coefficients.
pub fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal of a series with nonzero constant term.
pub fn inv(a: &[f64], len: usize) -> Vec<f64> {
    assert!(a[0] != 0.0, "series inverse needs a nonzero constant term");
    let mut out = vec![0.0; len];
    out[0] = 1.0 / a[0];
    for k in 1..len {
        let mut acc = 0.0;
        for j in 1..=k.min(a.len() - 1) {
            acc += a[j] * out[k - j];
        }
        out[k] = -acc / a[0];
    }
    out
}

/// Integer power (negative exponents allowed).
pub fn powi(a: &[f64], e: i32, len: usize) -> Vec<f64> {
    let base = if e < 0 { inv(a, len) } else { a[..a.len().min(len)].to_vec() };
    let mut n = e.unsigned_abs();
    let mut result = vec![0.0; len];
    result[0] = 1.0;
    let mut b = base;
    b.resize(len, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            result = mul(&result, &b, len);
        }
        n >>= 1;
        if n > 0 {
            b = mul(&b, &b, len);
        }
    }
    result
}

/// Evaluate `sum a_k z^k` by Horner's rule.
pub fn horner(a: &[f64], z: Complex64) -> Complex64 {
    a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// A truncated Laurent series `sum_{k >= min_pow} c_k r^k`.
///
/// `mass[k]` accumulates the absolute values of all contributions to
/// `c_k`, which lets callers decide whether a small principal-part
/// coefficient is genuine or cancellation noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub min_pow: i32,
    pub coeffs: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Laurent {
    pub fn zeros(min_pow: i32, max_pow: i32) -> Self {
        let len = (max_pow - min_pow + 1).max(0) as usize;
        Laurent {
            min_pow,
            coeffs: vec![0.0; len],
            mass: vec![0.0; len],
        }
    }

    pub fn max_pow(&self) -> i32 {
        self.min_pow + self.coeffs.len() as i32 - 1
    }

    pub fn add_at(&mut self, pow: i32, value: f64) {
        if pow < self.min_pow || pow > self.max_pow() {
            return;
        }
        let i = (pow - self.min_pow) as usize;
        self.coeffs[i] += value;
        self.mass[i] += value.abs();
    }

    pub fn coeff(&self, pow: i32) -> f64 {
        if pow < self.min_pow || pow > self.max_pow() {
            0.0
        } else {
            self.coeffs[(pow - self.min_pow) as usize]
        }
    }

    /// True when every negative-power coefficient is cancellation noise.
    pub fn principal_part_vanishes(&self, rel: f64) -> bool {
        let scale = self.mass.iter().cloned().fold(0.0, f64::max);
        (self.min_pow..0).all(|k| {
            let i = (k - self.min_pow) as usize;
            self.coeffs[i].abs() <= rel * self.mass[i].max(scale * 1e-3) || self.mass[i] == 0.0
        })
    }

    /// Order of the pole at the origin (0 if regular).
    pub fn pole_order(&self, rel: f64) -> u32 {
        let scale = self.mass.iter().cloned().fold(0.0, f64::max);
        for k in self.min_pow..0 {
            let i = (k - self.min_pow) as usize;
            if self.coeffs[i].abs() > rel * self.mass[i].max(scale * 1e-3) && self.mass[i] > 0.0 {
                return (-k) as u32;
            }
        }
        0
    }

    /// Coefficients of `r^0 .. r^max_pow` (the regular part).
    pub fn regular_part(&self) -> Vec<f64> {
        (0..=self.max_pow()).map(|k| self.coeff(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_geometric() {
        // 1/(1-x) = 1 + x + x^2 + ...
        let a = [1.0, -1.0];
        let s = inv(&a, 6);
        assert!(s.iter().all(|&c| (c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn negative_power_matches_inverse() {
        let a = [2.0, 0.5, -0.25, 0.125];
        let p = powi(&a, -2, 8);
        let q = inv(&mul(&a, &a, 8), 8);
        for (x, y) in p.iter().zip(&q) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

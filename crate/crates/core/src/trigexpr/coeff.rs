use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact scalar: a Laurent polynomial in `tau = 2*pi` with rational
/// coefficients.
///
/// Every constant produced by the shift operators has this shape: the
/// operator `-(1/2pi)(1/sin r) d/dr` contributes powers of `1/tau`, chain
/// rules on Gaussians contribute rationals in the (rational) decay rate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Coeff(BTreeMap<i32, BigRational>);

impl Coeff {
    pub fn zero() -> Self {
        Coeff(BTreeMap::new())
    }

    pub fn one() -> Self {
        Coeff::rational(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Coeff::rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Coeff::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(q: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(0, q);
        }
        Coeff(m)
    }

    /// `q * tau^k`.
    pub fn tau_monomial(q: BigRational, k: i32) -> Self {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(k, q);
        }
        Coeff(m)
    }

    /// Exact binary value of a float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Coeff::rational)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parts(&self) -> impl Iterator<Item = (i32, &BigRational)> {
        self.0.iter().map(|(k, q)| (*k, q))
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        let mut m = self.0.clone();
        for (k, q) in &other.0 {
            let e = m.entry(*k).or_insert_with(BigRational::zero);
            *e += q;
            if e.is_zero() {
                m.remove(k);
            }
        }
        Coeff(m)
    }

    pub fn neg(&self) -> Coeff {
        Coeff(self.0.iter().map(|(k, q)| (*k, -q)).collect())
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (k1, q1) in &self.0 {
            for (k2, q2) in &other.0 {
                out = out.add(&Coeff::tau_monomial(q1 * q2, k1 + k2));
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> Coeff {
        if q.is_zero() {
            return Coeff::zero();
        }
        Coeff(self.0.iter().map(|(k, c)| (*k, c * q)).collect())
    }

    pub fn scale_int(&self, v: i64) -> Coeff {
        self.scale(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Multiply by `tau^k`.
    pub fn shift_tau(&self, k: i32) -> Coeff {
        Coeff(self.0.iter().map(|(p, c)| (p + k, c.clone())).collect())
    }

    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|(k, q)| q.to_f64().unwrap_or(f64::NAN) * TAU.powi(*k))
            .sum()
    }

    pub fn is_negative(&self) -> bool {
        self.to_f64() < 0.0
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, q) in &self.0 {
            if !first {
                write!(f, " {} ", if q.is_negative() { "-" } else { "+" })?;
            } else if q.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = q.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*tau")?,
                _ => write!(f, "{a}*tau^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_powers_combine() {
        let a = Coeff::tau_monomial(BigRational::one(), -1);
        let b = Coeff::tau_monomial(BigRational::one(), 1);
        assert_eq!(a.mul(&b), Coeff::one());
        let s = a.add(&a.neg());
        assert!(s.is_zero());
        assert!((a.to_f64() - 1.0 / TAU).abs() < 1e-17);
    }
}

//! Spherical Fourier analysis of radial functions on `H^{2n+1}`.
//!
//! Conventions:
//!
//! ```text
//!     f^(lambda) = c_n int_0^inf f(r) phi_lambda(r) sinh^{2n} r dr
//!     f(r)       = int_R phi_lambda(r) f^(lambda) dmu(lambda)
//!     dmu        = C_n prod_{k<n} (lambda^2 + k^2) dlambda
//! ```
//!
//! `C_n` is calibrated against the heat kernel at the origin rather than
//! taken from a formula.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::kernels;
use crate::quad::{self, integrate_path, integrate_real, Segment, Tolerance};
use crate::spherical;

/// `C_n prod_{k<n} (lambda^2 + k^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub n: u32,
    pub constant: f64,
}

/// Coefficients of `prod_{k<n} (x + k^2)` in powers of `x = lambda^2`.
pub fn density_polynomial(n: u32) -> Vec<f64> {
    let mut p = vec![1.0];
    for k in 0..n {
        let k2 = (k * k) as f64;
        let mut next = vec![0.0; p.len() + 1];
        for (i, a) in p.iter().enumerate() {
            next[i] += a * k2;
            next[i + 1] += a;
        }
        p = next;
    }
    p
}

/// `int_R lambda^{2m} e^{-t lambda^2/2} dlambda`.
pub fn gaussian_moment(m: u32, t: f64) -> f64 {
    (2.0 * PI).sqrt() * t.powf(-(m as f64) - 0.5) * crate::special::double_factorial_odd(m)
}

impl SpectralDensity {
    pub fn density(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        self.constant * (0..self.n).map(|k| l2 + (k * k) as f64).product::<f64>()
    }

    /// `int_R e^{-t(lambda^2+n^2)/2} dmu`, which should equal `gamma_t(0)`.
    pub fn heat_trace(&self, t: f64) -> f64 {
        let n2 = (self.n * self.n) as f64;
        let s: f64 = density_polynomial(self.n)
            .iter()
            .enumerate()
            .map(|(m, a)| a * gaussian_moment(m as u32, t))
            .sum();
        self.constant * (-0.5 * t * n2).exp() * s
    }
}

/// Relative spread allowed between calibrations at different times.
pub const CALIBRATION_TOL: f64 = 1e-8;

/// Fit `C_n` so that the heat trace matches `gamma_t(0)` at each sample time.
pub fn calibrate_plancherel(n: u32, t_samples: &[f64]) -> Result<SpectralDensity> {
    if t_samples.is_empty() {
        return Err(Error::InvalidParameter("calibration needs at least one time".into()));
    }
    let mut fits = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let g0 = kernels::gamma(t, n)?.evaluate_real(0.0)?;
        let unit = SpectralDensity { n, constant: 1.0 }.heat_trace(t);
        fits.push(g0 / unit);
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let spread = fits.iter().map(|c| ((c - mean) / mean).abs()).fold(0.0, f64::max);
    if !(spread <= CALIBRATION_TOL) {
        return Err(Error::InconsistentCalibration { spread });
    }
    Ok(SpectralDensity { n, constant: mean })
}

/// Calibrated density for `n`, computed once per process.
pub fn plancherel(n: u32) -> Result<SpectralDensity> {
    static CACHE: OnceLock<Mutex<Vec<(u32, SpectralDensity)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some((_, d)) = cache.lock().expect("cache poisoned").iter().find(|(k, _)| *k == n) {
        return Ok(*d);
    }
    let d = calibrate_plancherel(n, &[0.5, 1.0, 2.0])?;
    cache.lock().expect("cache poisoned").push((n, d));
    Ok(d)
}

/// Quadrature nodes on `[0, lambda_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weights of an embedded lower-order rule, for error estimates.
    pub embedded: Option<Vec<f64>>,
    pub lambda_max: f64,
}

/// Panels used by [`SpectralGrid::kronrod`] unless told otherwise.
pub const DEFAULT_PANELS: usize = 20;

impl SpectralGrid {
    /// Composite 21-point Gauss-Kronrod rule with the embedded 10-point
    /// Gauss rule kept for error estimation.
    pub fn kronrod(lambda_max: f64, panels: usize) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) || panels == 0 {
            return Err(Error::InvalidParameter(format!("bad spectral grid: lambda_max = {lambda_max}, panels = {panels}")));
        }
        let (lambdas, weights) = quad::composite_kronrod(0.0, lambda_max, panels);
        let (_, embedded) = quad::composite_gauss_embedded(0.0, lambda_max, panels);
        Ok(SpectralGrid {
            lambdas,
            weights,
            embedded: Some(embedded),
            lambda_max,
        })
    }

    /// Default grid for a run whose smallest time is `t_min`:
    /// `lambda_max = 8 / sqrt(t_min)`.
    pub fn for_time(t_min: f64) -> Result<Self> {
        SpectralGrid::kronrod(8.0 / t_min.sqrt(), DEFAULT_PANELS)
    }

    /// Trapezoid weights on arbitrary increasing nodes.
    pub fn from_nodes(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.windows(2).any(|w| !(w[1] > w[0])) || lambdas.first().is_some_and(|l| *l < 0.0) {
            return Err(Error::InvalidParameter("spectral nodes must be nonnegative and strictly increasing".into()));
        }
        let m = lambdas.len();
        let mut weights = vec![0.0; m];
        for i in 1..m {
            let h = 0.5 * (lambdas[i] - lambdas[i - 1]);
            weights[i - 1] += h;
            weights[i] += h;
        }
        let lambda_max = lambdas.last().copied().unwrap_or(0.0);
        Ok(SpectralGrid {
            lambdas,
            weights,
            embedded: None,
            lambda_max,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Keep only nodes below `cut`.
    pub fn truncated(&self, cut: f64) -> SpectralGrid {
        let keep = self.lambdas.iter().take_while(|l| **l < cut).count();
        SpectralGrid {
            lambdas: self.lambdas[..keep].to_vec(),
            weights: self.weights[..keep].to_vec(),
            embedded: self.embedded.as_ref().map(|e| e[..keep].to_vec()),
            lambda_max: cut.min(self.lambda_max),
        }
    }
}

/// `f^` sampled on a grid, with the density that turns sums into
/// integrals over `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub n: u32,
    pub density: SpectralDensity,
    pub grid: SpectralGrid,
    pub values: Vec<Complex64>,
}

/// A spectral integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl SpectralProfile {
    pub fn from_fn<F: Fn(f64) -> Complex64>(n: u32, grid: SpectralGrid, f: F) -> Result<Self> {
        let density = plancherel(n)?;
        let values = grid.lambdas.iter().map(|&l| f(l)).collect();
        Ok(SpectralProfile { n, density, grid, values })
    }

    pub fn real<F: Fn(f64) -> f64>(n: u32, grid: SpectralGrid, f: F) -> Result<Self> {
        SpectralProfile::from_fn(n, grid, |l| Complex64::new(f(l), 0.0))
    }

    pub fn zero(n: u32, grid: SpectralGrid) -> Result<Self> {
        SpectralProfile::from_fn(n, grid, |_| Complex64::new(0.0, 0.0))
    }

    /// `(lambda, 2 w mu(lambda))` for every node: integrating an even
    /// function against `dmu` over `R` is `sum` of these times the values.
    pub fn measure(&self) -> Vec<(f64, f64)> {
        self.grid
            .lambdas
            .iter()
            .zip(&self.grid.weights)
            .map(|(&l, &w)| (l, 2.0 * w * self.density.density(l)))
            .collect()
    }

    /// `int_R g(lambda, f^(lambda)) dmu` for even `g`, with an error
    /// estimate from the embedded rule when available.
    pub fn integrate<G: Fn(f64, Complex64) -> Complex64>(&self, g: G) -> (Complex64, f64) {
        let mut hi = Complex64::new(0.0, 0.0);
        let mut lo = Complex64::new(0.0, 0.0);
        for (i, (&l, v)) in self.grid.lambdas.iter().zip(&self.values).enumerate() {
            let x = g(l, *v) * 2.0 * self.density.density(l);
            hi += x * self.grid.weights[i];
            if let Some(e) = &self.grid.embedded {
                lo += x * e[i];
            }
        }
        let err = if self.grid.embedded.is_some() { (hi - lo).norm() } else { 0.0 };
        (hi, err)
    }

    pub fn map_values<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> SpectralProfile {
        let values = self.grid.lambdas.iter().zip(&self.values).map(|(&l, v)| f(l, *v)).collect();
        SpectralProfile { values, ..self.clone() }
    }

    /// Restrict to `lambda < cut`, which is `F^ 1_{lambda < cut}` on this grid.
    pub fn truncated(&self, cut: f64) -> SpectralProfile {
        let grid = self.grid.truncated(cut);
        let values = self.values[..grid.len()].to_vec();
        SpectralProfile { grid, values, ..self.clone() }
    }

    /// Gaussian-fit estimate of `int_{|lambda| > Lambda} |f^| dmu`, fitted
    /// through the last two nodes. When that fit does not decay (an
    /// oscillating profile) it goes through the peaks of `|f^|` on the last
    /// two tenths of `[0, Lambda]` instead.
    pub fn tail_estimate(&self) -> f64 {
        let m = self.values.len();
        if m < 2 {
            return 0.0;
        }
        let last = (
            (self.grid.lambdas[m - 2], self.values[m - 2].norm()),
            (self.grid.lambdas[m - 1], self.values[m - 1].norm()),
        );
        let est = self.gaussian_tail(last);
        if est.is_finite() {
            return est;
        }
        let lmax = self.grid.lambda_max;
        let peak = |lo: f64, hi: f64| {
            self.grid
                .lambdas
                .iter()
                .zip(&self.values)
                .filter(|(l, _)| **l >= lo && **l <= hi)
                .map(|(l, v)| (*l, v.norm()))
                .fold(None, |best: Option<(f64, f64)>, x| match best {
                    Some(b) if b.1 >= x.1 => Some(b),
                    _ => Some(x),
                })
        };
        let (lo, hi) = (peak(0.8 * lmax, 0.9 * lmax), peak(0.9 * lmax, lmax));
        let est = match (lo, hi) {
            (Some(a), Some(b)) if a.0 < b.0 => self.gaussian_tail((a, b)),
            _ => est,
        };
        if est.is_finite() {
            return est;
        }
        // An end-of-grid envelope at roundoff level has no shape to fit;
        // charge it over one unit of lambda.
        let top = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (lb, fb) = hi.unwrap_or((self.grid.lambdas[m - 1], self.values[m - 1].norm()));
        if fb <= NOISE_RATIO * top {
            let d = self.density;
            return 2.0 * fb * d.density(lb + 1.0);
        }
        est
    }

    fn gaussian_tail(&self, ((la, fa), (lb, fb)): ((f64, f64), (f64, f64))) -> f64 {
        if fb == 0.0 {
            return 0.0;
        }
        let b = (fa / fb).ln() / (lb * lb - la * la);
        if !(b > 0.0) {
            return f64::INFINITY;
        }
        let width = (50.0 / b).sqrt();
        let d = self.density;
        integrate_real(lb, lb + width, |l| 2.0 * fb * (-b * (l * l - lb * lb)).exp() * d.density(l), Tolerance::new(0.0, 1e-8))
            .map(|(v, _)| v)
            .unwrap_or(f64::INFINITY)
    }
}

/// Relative level below which the end of a profile is treated as noise.
pub const NOISE_RATIO: f64 = 1e-12;

/// Largest discarded spectral mass tolerated by [`inverse_transform`].
pub const TRUNCATION_LIMIT: f64 = 1e-10;

/// A point value of the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: Complex64,
    pub quad_error: f64,
    pub tail: f64,
}

/// `f(r) = 2 int_0^Lambda phi_lambda(r) f^(lambda) dmu(lambda)`.
pub fn inverse_transform(p: &SpectralProfile, r: f64) -> Result<Inversion> {
    let tail = p.tail_estimate();
    let (value, quad_error) = inverse_unchecked(p, r)?;
    if tail > TRUNCATION_LIMIT * value.norm().max(1.0) {
        return Err(Error::TruncationWarning {
            tail,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(Inversion { value, quad_error, tail })
}

fn inverse_unchecked(p: &SpectralProfile, r: f64) -> Result<(Complex64, f64)> {
    let mut phi = vec![Complex64::new(0.0, 0.0); p.grid.len()];
    spherical::spherical(p.n).real.eval_many(&p.grid.lambdas, Complex64::new(r, 0.0), &mut phi)?;
    let mut hi = Complex64::new(0.0, 0.0);
    let mut lo = Complex64::new(0.0, 0.0);
    for (i, &l) in p.grid.lambdas.iter().enumerate() {
        let x = phi[i] * p.values[i] * 2.0 * p.density.density(l);
        hi += x * p.grid.weights[i];
        if let Some(e) = &p.grid.embedded {
            lo += x * e[i];
        }
    }
    let err = if p.grid.embedded.is_some() { (hi - lo).norm() } else { 0.0 };
    Ok((hi, err))
}

/// Multiply by `e^{-t(lambda^2 + n^2)/2}`.
pub fn heat_multiplier(p: &SpectralProfile, t: f64) -> Result<SpectralProfile> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("heat time must be nonnegative, got {t}")));
    }
    let n2 = (p.n * p.n) as f64;
    Ok(p.map_values(|l, v| v * (-0.5 * t * (l * l + n2)).exp()))
}

/// `int_R |f^|^2 dmu`.
pub fn plancherel_norm(p: &SpectralProfile) -> f64 {
    sobolev_norm(p, 0.0)
}

/// `int_R |f^|^2 (1 + n^2 + lambda^2)^s dmu` (the squared norm).
pub fn sobolev_norm(p: &SpectralProfile, s: f64) -> f64 {
    let n2 = (p.n * p.n) as f64;
    p.integrate(|l, v| Complex64::new(v.norm_sqr() * (1.0 + n2 + l * l).powf(s), 0.0)).0.re
}

/// `|f(r)| <= m e^{-alpha r}` for `r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub m: f64,
    pub alpha: f64,
}

/// Tail past which [`forward_transform`] stops integrating, and the bound
/// on what it discards.
pub fn forward_cutoff(n: u32, bound: DecayBound) -> (f64, f64) {
    let beta = bound.alpha - n as f64;
    let cut = 10.0 + 40.0 / beta;
    // |phi_{lambda,n}(r)| <= phi_{0,n}(r) <= 2^n (1+r)^n e^{-nr}, sinh^{2n} <= e^{2nr}/4^n.
    let c = kernels::ModelParams::new(n, 1.0).map(|p| p.c_n()).unwrap_or(1.0);
    let tail = c * bound.m * (1.0 + cut).powi(n as i32) * (-beta * cut).exp() / (2f64.powi(n as i32) * beta) * (1.0 + n as f64 / beta);
    (cut, tail)
}

/// λ-values per parallel task in [`forward_transform`].
const FORWARD_CHUNK: usize = 21;

/// `f^(lambda) = c_n int_0^inf f(r) phi_lambda(r) sinh^{2n} r dr` on the grid.
pub fn forward_transform<F>(f: F, bound: DecayBound, n: u32, grid: &SpectralGrid) -> Result<SpectralProfile>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(bound.alpha > n as f64) || !(bound.m >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay rate {} must exceed n = {n} and m = {} be nonnegative",
            bound.alpha, bound.m
        )));
    }
    let (cut, _) = forward_cutoff(n, bound);
    for i in 0..=64 {
        let r = cut * i as f64 / 64.0;
        let v = f(r).abs();
        let b = bound.m * (-bound.alpha * r).exp();
        if !(v <= b * (1.0 + 1e-9) + 1e-300) {
            return Err(Error::DecayViolation { r, value: v, bound: b });
        }
    }
    let c_n = kernels::ModelParams::new(n, 1.0)?.c_n();
    let sph = spherical::spherical(n);
    let chunks: Vec<&[f64]> = grid.lambdas.chunks(FORWARD_CHUNK).collect();
    let path = [Segment::real(0.0, cut)];
    let parts = exec::try_map(&chunks, |lams| {
        let res = integrate_path(
            &path,
            lams.len(),
            |z, out| {
                sph.real.eval_many(lams, z, out)?;
                let w = c_n * f(z.re) * z.re.sinh().powi(2 * n as i32);
                out.iter_mut().for_each(|o| *o *= w);
                Ok(())
            },
            Tolerance::new(1e-15, 1e-12),
        )?;
        Ok::<_, Error>(res.values)
    })?;
    let values = parts.into_iter().flatten().collect();
    Ok(SpectralProfile {
        n,
        density: plancherel(n)?,
        grid: grid.clone(),
        values,
    })
}

/// Write `n, C_n, lambda_max` then `(lambda, Re, Im)` rows.
pub fn write_profile<W: Write>(p: &SpectralProfile, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record(["n", "C_n", "lambda_max"])?;
    out.write_record([p.n.to_string(), format!("{:e}", p.density.constant), format!("{:e}", p.grid.lambda_max)])?;
    out.write_record(["lambda", "re", "im"])?;
    for (l, v) in p.grid.lambdas.iter().zip(&p.values) {
        out.write_record([format!("{l:e}"), format!("{:e}", v.re), format!("{:e}", v.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Read a profile written by [`write_profile`]. Nodes that do not form a
/// known Kronrod grid get trapezoid weights.
pub fn read_profile<R: Read>(r: R) -> Result<SpectralProfile> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(r);
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 3 {
        return Err(Error::Parse("profile needs a header, a parameter row and a column row".into()));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    let n: u32 = rows[1][0].trim().parse().map_err(|e| Error::Parse(format!("n: {e}")))?;
    let constant = num(&rows[1][1])?;
    let lambda_max = num(&rows[1][2])?;
    let mut lambdas = Vec::new();
    let mut values = Vec::new();
    for row in &rows[3..] {
        if row.len() < 3 {
            return Err(Error::Parse(format!("short profile row {row:?}")));
        }
        lambdas.push(num(&row[0])?);
        values.push(Complex64::new(num(&row[1])?, num(&row[2])?));
    }
    let grid = match lambdas.len() {
        m if m > 0 && m % 21 == 0 => {
            let g = SpectralGrid::kronrod(lambda_max, m / 21)?;
            if g.lambdas.iter().zip(&lambdas).all(|(a, b)| (a - b).abs() <= 1e-12 * lambda_max) {
                g
            } else {
                SpectralGrid::from_nodes(lambdas)?
            }
        }
        _ => {
            let mut g = SpectralGrid::from_nodes(lambdas)?;
            g.lambda_max = lambda_max.max(g.lambda_max);
            g
        }
    };
    Ok(SpectralProfile {
        n,
        density: SpectralDensity { n, constant },
        grid,
        values,
    })
}

/// `C^inf` step: 1 for `x <= 0`, 0 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let psi = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        psi(1.0 - x) / (psi(1.0 - x) + psi(x))
    }
}

/// The three spectral test profiles: `e^{-lambda^2/4}`,
/// `lambda^2 e^{-lambda^2/2}` and a smoothed indicator of `[0, 2]`
/// vanishing past 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestProfile {
    Gaussian,
    Moment,
    SmoothIndicator,
}

impl TestProfile {
    pub const ALL: [TestProfile; 3] = [TestProfile::Gaussian, TestProfile::Moment, TestProfile::SmoothIndicator];

    pub fn eval(self, lambda: f64) -> f64 {
        match self {
            TestProfile::Gaussian => (-lambda * lambda / 4.0).exp(),
            TestProfile::Moment => lambda * lambda * (-lambda * lambda / 2.0).exp(),
            TestProfile::SmoothIndicator => smooth_step(lambda.abs() - 2.0),
        }
    }

    /// Grid on which the profile's spectral tail is negligible.
    pub fn grid(self) -> Result<SpectralGrid> {
        match self {
            TestProfile::Gaussian => SpectralGrid::kronrod(14.0, DEFAULT_PANELS),
            TestProfile::Moment => SpectralGrid::kronrod(12.0, DEFAULT_PANELS),
            TestProfile::SmoothIndicator => SpectralGrid::kronrod(3.0, DEFAULT_PANELS),
        }
    }

    pub fn profile(self, n: u32) -> Result<SpectralProfile> {
        SpectralProfile::real(n, self.grid()?, |l| self.eval(l))
    }

    pub fn name(self) -> &'static str {
        match self {
            TestProfile::Gaussian => "gaussian",
            TestProfile::Moment => "moment",
            TestProfile::SmoothIndicator => "smooth-indicator",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_constants() {
        let c0 = plancherel(0).unwrap().constant;
        assert!((c0 - 1.0 / (2.0 * PI)).abs() < 1e-14);
        let c1 = plancherel(1).unwrap().constant;
        assert!((c1 * 4.0 * PI * PI - 1.0).abs() < 1e-13);
        assert!(calibrate_plancherel(2, &[0.5, 1.0, 2.0]).is_ok());
        assert!(calibrate_plancherel(2, &[]).is_err());
    }

    #[test]
    fn density_polynomial_matches_product() {
        assert_eq!(density_polynomial(1), vec![0.0, 1.0]);
        assert_eq!(density_polynomial(3), vec![0.0, 4.0, 5.0, 1.0]);
    }

    #[test]
    fn multiplier_semigroup() {
        let p = TestProfile::Gaussian.profile(1).unwrap();
        let a = heat_multiplier(&heat_multiplier(&p, 0.5).unwrap(), 0.5).unwrap();
        let b = heat_multiplier(&p, 1.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-15);
        }
        assert_eq!(heat_multiplier(&p, 0.0).unwrap(), p);
    }

    #[test]
    fn heat_kernel_inverts_to_origin_value() {
        for n in 1..=2 {
            let t = 1.0;
            let grid = SpectralGrid::for_time(t).unwrap();
            let p = SpectralProfile::real(n, grid, |l| (-0.5 * t * (l * l + (n * n) as f64)).exp()).unwrap();
            let v = inverse_transform(&p, 0.0).unwrap().value.re;
            let g = kernels::gamma(t, n).unwrap().evaluate_real(0.0).unwrap();
            assert!((v - g).abs() < 1e-10 * g, "n={n}: {v} vs {g}");
        }
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-0.1), 1.0);
        assert_eq!(smooth_step(1.5), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn profile_csv_round_trip() {
        let p = TestProfile::Moment.profile(2).unwrap();
        let mut buf = Vec::new();
        write_profile(&p, &mut buf).unwrap();
        let q = read_profile(buf.as_slice()).unwrap();
        assert_eq!(q.grid, p.grid);
        for (a, b) in p.values.iter().zip(&q.values) {
            assert!((a - b).norm() <= 1e-15 * a.norm().max(1e-300));
        }
    }
}

#[cfg(test)]
mod forward_tests {
    use super::*;

    #[test]
    fn forward_of_heat_kernel_is_multiplier() {
        for n in 1..=2u32 {
            for t in [0.5, 1.0] {
                let g = kernels::gamma(t, n).unwrap();
                let num = g.numeric();
                let g0 = num.eval_guarded(Complex64::new(0.0, 0.0), 1e-8).unwrap().re;
                let bound = DecayBound { m: 2.0 * g0 * (0.5 * t * ((n + 1) * (n + 1)) as f64).exp(), alpha: n as f64 + 1.0 };
                let grid = SpectralGrid::for_time(t).unwrap();
                let start = std::time::Instant::now();
                let p = forward_transform(|r| num.eval_guarded(Complex64::new(r, 0.0), 1e-8).unwrap().re, bound, n, &grid).unwrap();
                let mut worst: f64 = 0.0;
                for (l, v) in grid.lambdas.iter().zip(&p.values) {
                    let m = (-0.5 * t * (l * l + (n * n) as f64)).exp();
                    worst = worst.max((v - m).norm());
                }
                eprintln!("n={n} t={t} worst={worst:e} {:?}", start.elapsed());
                assert!(worst < 1e-7);
            }
        }
    }
}

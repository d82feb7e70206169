//! Contours in the pole-avoiding strip, the meromorphic quantities `I(R)`
//! and `J(R)`, and their limits as `Re R -> infinity`.
//!
//! Both `I` and `J` reduce to weighted sums over a spectral grid of the
//! pairing
//!
//! ```text
//!     P(lambda, tau; R) = c_n int_0^R phi_lambda(ir) nu_{2 tau}(r) sin^{2n} r dr,
//! ```
//!
//! whose limit is `e^{tau (lambda^2 + n^2)}`. `I` uses `tau = t`, `J` uses
//! `tau = t/2`. The finite sum over the grid is taken inside the contour
//! integral, so one adaptive quadrature serves every grid node.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::kernels::{self, ModelParams};
use crate::quad::{integrate_path_scalar, integrate_real, Segment, Tolerance};
use crate::shift;
use crate::spectral::{self, SpectralProfile};
use crate::spherical::{self, RadialExpr, SphericalEval};
use crate::trigexpr::{Flavor, NumExpr, SymExpr};

/// `S_{eps,A}`: `Re R > 0`, `|Im R| < A`, and `|R - m pi| > eps` for `m >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleRegion {
    pub epsilon: f64,
    pub a: f64,
}

impl PoleRegion {
    pub fn new(epsilon: f64, a: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < a && a < PI) {
            return Err(Error::InvalidParameter(format!("need 0 < eps < A < pi, got eps = {epsilon}, A = {a}")));
        }
        Ok(PoleRegion { epsilon, a })
    }

    pub fn contains(&self, r: Complex64) -> bool {
        if !(r.re > 0.0 && r.im.abs() < self.a) {
            return false;
        }
        let m = (r.re / PI).round().max(1.0);
        [m - 1.0, m, m + 1.0]
            .into_iter()
            .filter(|k| *k >= 1.0)
            .all(|k| (r - Complex64::new(k * PI, 0.0)).norm() > self.epsilon)
    }
}

impl Default for PoleRegion {
    fn default() -> Self {
        PoleRegion { epsilon: 0.3, a: 1.0 }
    }
}

/// A piecewise path from 0 to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath {
    pub segments: Vec<Segment>,
    pub target: Complex64,
}

impl ContourPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Real path from `a` to `b` (`a < b`) with upper semicircles of radius
/// `detour` over every `m pi` in between. Both ends must clear the poles
/// by at least `detour`.
fn real_with_arcs(a: f64, b: f64, detour: f64) -> Vec<Segment> {
    let mut segs = Vec::new();
    let mut x = a;
    let mut m = (a / PI).floor() as i64 + 1;
    while (m as f64) * PI < b {
        let c = m as f64 * PI;
        if c - detour > x {
            segs.push(Segment::real(x, c - detour));
        }
        segs.push(Segment::upper_arc(c, detour));
        x = c + detour;
        m += 1;
    }
    if b > x {
        segs.push(Segment::real(x, b));
    }
    segs
}

fn nearest_pole(x: f64) -> f64 {
    (x / PI).round().max(1.0) * PI
}

/// Path from 0 to `target`: real segments, upper arcs of radius `detour`
/// over each pole passed, then a vertical segment (or, when `Re target`
/// lies within `detour` of a pole, an arc and a radial segment).
pub fn build_contour(target: Complex64, region: &PoleRegion, detour: f64) -> Result<ContourPath> {
    if !region.contains(target) {
        return Err(Error::InvalidTarget(target));
    }
    if !(detour > region.epsilon && detour < region.a) {
        return Err(Error::InvalidParameter(format!(
            "detour radius {detour} must lie strictly between eps = {} and A = {}",
            region.epsilon, region.a
        )));
    }
    let x = target.re;
    let c = nearest_pole(x);
    let mut segs;
    if (x - c).abs() < detour {
        segs = real_with_arcs(0.0, c - detour, detour);
        let offset = target - c;
        let mut theta1 = offset.arg();
        if theta1 < 0.0 && x < c {
            theta1 += 2.0 * PI;
        }
        segs.push(Segment::Arc {
            center: Complex64::new(c, 0.0),
            radius: detour,
            theta0: PI,
            theta1,
        });
        let on_circle = Complex64::new(c, 0.0) + Complex64::from_polar(detour, theta1);
        segs.push(Segment::line(on_circle, target));
    } else {
        segs = real_with_arcs(0.0, x, detour);
        if target.im != 0.0 {
            segs.push(Segment::line(Complex64::new(x, 0.0), target));
        }
    }
    segs.retain(|s| s.length() > 0.0);
    Ok(ContourPath { segments: segs, target })
}

/// Adaptive Gauss-Kronrod integral along a contour.
pub fn contour_quad<F>(f: F, path: &ContourPath, tol: Tolerance) -> Result<(Complex64, f64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    integrate_path_scalar(&path.segments, f, tol)
}

/// `c_n nu_{2 tau}(r) sin^{2n} r sum_i w_i phi_{lambda_i}(ir)`.
#[derive(Debug, Clone)]
pub struct HeatPairing {
    pub n: u32,
    pub tau: f64,
    lambdas: Vec<f64>,
    weights: Vec<Complex64>,
    c_n: f64,
    kernel: Arc<NumExpr>,
    sph: Arc<SphericalEval>,
}

impl HeatPairing {
    pub fn new(n: u32, tau: f64, lambdas: &[f64], weights: &[Complex64]) -> Result<Self> {
        if lambdas.len() != weights.len() {
            return Err(Error::InvalidParameter("one weight per spectral node".into()));
        }
        let (lambdas, weights): (Vec<f64>, Vec<Complex64>) =
            lambdas.iter().zip(weights).filter(|(_, w)| w.norm() > 0.0).map(|(l, w)| (*l, *w)).unzip();
        let kernel = kernels::nu(2.0 * tau, n)?.multiply(&SymExpr::sin_power(Flavor::Circular, 2 * n as i32))?;
        Ok(HeatPairing {
            n,
            tau,
            lambdas,
            weights,
            c_n: ModelParams::new(n, 1.0)?.c_n(),
            kernel: kernel.numeric(),
            sph: spherical::spherical(n),
        })
    }

    /// Single node with unit weight.
    pub fn single(n: u32, lambda: f64, tau: f64) -> Result<Self> {
        HeatPairing::new(n, tau, &[lambda], &[Complex64::new(1.0, 0.0)])
    }

    /// `sum_i w_i phi_{lambda_i}(ir)`.
    pub fn spectral_sum(&self, r: Complex64) -> Result<Complex64> {
        let mut phi = vec![Complex64::new(0.0, 0.0); self.lambdas.len()];
        self.sph.imag.eval_many(&self.lambdas, r, &mut phi)?;
        Ok(phi.iter().zip(&self.weights).map(|(p, w)| p * w).sum())
    }

    pub fn integrand(&self, r: Complex64) -> Result<Complex64> {
        if self.lambdas.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let k = self.kernel.eval_guarded(r, 1e-8)?;
        Ok(self.spectral_sum(r)? * k * self.c_n)
    }

    pub fn integrate(&self, segments: &[Segment], tol: Tolerance) -> Result<(Complex64, f64)> {
        integrate_path_scalar(segments, |z| self.integrand(z), tol)
    }

    /// Limit as `Re R -> infinity`: `sum_i w_i e^{tau (lambda_i^2 + n^2)}`.
    pub fn limit(&self) -> Complex64 {
        let n2 = (self.n * self.n) as f64;
        self.lambdas
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * (self.tau * (l * l + n2)).exp())
            .sum()
    }
}

/// `c_n int_path phi_{lambda,n}(ir) nu_{2t}(r) sin^{2n} r dr`.
pub fn spher_heat_integral(n: u32, lambda: f64, t: f64, path: &ContourPath, tol: Tolerance) -> Result<(Complex64, f64)> {
    HeatPairing::single(n, lambda, t)?.integrate(&path.segments, tol)
}

/// `R_j = (j + 1/2) pi + i imag`.
pub fn r_sequence(js: std::ops::RangeInclusive<u32>, imag: f64) -> Vec<Complex64> {
    js.map(|j| Complex64::new((j as f64 + 0.5) * PI, imag)).collect()
}

/// Everything needed to run a limit along a target sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig {
    pub region: PoleRegion,
    pub detour: f64,
    pub targets: Vec<Complex64>,
    pub tol: Tolerance,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            region: PoleRegion::default(),
            detour: 0.5,
            targets: r_sequence(2..=8, 0.3),
            tol: Tolerance::new(0.0, 1e-12),
        }
    }
}

impl LimitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.targets.len() < 3 {
            return Err(Error::InvalidParameter("a limit needs at least three targets".into()));
        }
        if self.targets.windows(2).any(|w| !(w[1].re > w[0].re)) {
            return Err(Error::InvalidParameter("targets must have increasing real parts".into()));
        }
        for t in &self.targets {
            build_contour(*t, &self.region, self.detour)?;
        }
        Ok(())
    }
}

/// Values of a pairing at every target, sharing the real-axis pieces
/// between consecutive targets when their real parts clear the poles.
pub fn pairing_values(p: &HeatPairing, cfg: &LimitConfig) -> Result<Vec<(Complex64, f64)>> {
    cfg.validate()?;
    let shareable = cfg.targets.iter().all(|t| (t.re - nearest_pole(t.re)).abs() >= cfg.detour);
    if !shareable {
        let paths: Vec<ContourPath> = cfg.targets.iter().map(|t| build_contour(*t, &cfg.region, cfg.detour)).collect::<Result<_>>()?;
        return exec::try_map(&paths, |path| p.integrate(&path.segments, cfg.tol));
    }
    // pieces: [0, x_0], [x_0, x_1], ..., then the verticals
    let xs: Vec<f64> = cfg.targets.iter().map(|t| t.re).collect();
    let mut pieces: Vec<Vec<Segment>> = Vec::new();
    pieces.push(real_with_arcs(0.0, xs[0], cfg.detour));
    for w in xs.windows(2) {
        pieces.push(real_with_arcs(w[0], w[1], cfg.detour));
    }
    for t in &cfg.targets {
        if t.im != 0.0 {
            pieces.push(vec![Segment::line(Complex64::new(t.re, 0.0), *t)]);
        } else {
            pieces.push(Vec::new());
        }
    }
    let parts = exec::try_map(&pieces, |segs| {
        if segs.is_empty() {
            Ok((Complex64::new(0.0, 0.0), 0.0))
        } else {
            p.integrate(segs, cfg.tol)
        }
    })?;
    let m = xs.len();
    let mut out = Vec::with_capacity(m);
    let (mut acc, mut err) = (Complex64::new(0.0, 0.0), 0.0);
    for j in 0..m {
        acc += parts[j].0;
        err += parts[j].1;
        let (v, e) = parts[m + j];
        out.push((acc + v, err + e));
    }
    Ok(out)
}

/// One-term Richardson on the last two points, modelling `V(R) = a + c/R`.
pub fn extrapolate(targets: &[Complex64], values: &[Complex64]) -> Complex64 {
    let m = values.len();
    if m < 2 {
        return values.last().copied().unwrap_or_default();
    }
    let (r1, r2) = (targets[m - 2], targets[m - 1]);
    (r2 * values[m - 1] - r1 * values[m - 2]) / (r2 - r1)
}

/// JSON report of one limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "R_sequence")]
    pub r_sequence: Vec<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
    pub extrapolated: [f64; 2],
    pub target: Option<[f64; 2]>,
    pub residual: Option<f64>,
    pub boundary_max: Option<Vec<f64>>,
    pub quad_error: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl LimitReport {
    pub fn extrapolated(&self) -> Complex64 {
        Complex64::new(self.extrapolated[0], self.extrapolated[1])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Relative change below which successive values count as converged.
pub const NOISE_FLOOR: f64 = 1e-10;

/// Assemble a report, failing with `NonConvergence` when the residuals
/// (or, without a target, the successive differences) grow over the last
/// three targets while above the noise floor.
pub fn limit_report(
    params: BTreeMap<String, f64>,
    targets: &[Complex64],
    values: &[(Complex64, f64)],
    target: Option<Complex64>,
) -> Result<LimitReport> {
    let vs: Vec<Complex64> = values.iter().map(|v| v.0).collect();
    let quad_error = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let extrapolated = extrapolate(targets, &vs);
    let scale = extrapolated.norm().max(target.map_or(0.0, |t| t.norm()));
    let floor = NOISE_FLOOR * scale + 10.0 * quad_error;
    let track: Vec<f64> = match target {
        Some(t) => vs.iter().map(|v| (v - t).norm()).collect(),
        None => vs.windows(2).map(|w| (w[1] - w[0]).norm()).collect(),
    };
    let m = track.len();
    if m >= 3 {
        for i in (m - 2)..m {
            if track[i] > track[i - 1] && track[i] > floor {
                return Err(Error::NonConvergence(format!(
                    "distance grew from {:e} to {:e} at R = {}",
                    track[i - 1],
                    track[i],
                    targets[i + targets.len() - m]
                )));
            }
        }
    }
    let residual = target.map(|t| (extrapolated - t).norm() / t.norm().max(f64::MIN_POSITIVE));
    Ok(LimitReport {
        params,
        r_sequence: targets.iter().map(|z| pair(*z)).collect(),
        values: vs.iter().map(|z| pair(*z)).collect(),
        extrapolated: pair(extrapolated),
        target: target.map(pair),
        residual,
        boundary_max: None,
        quad_error,
    })
}

/// Limit of the spherical-heat pairing, checked against `e^{t(lambda^2+n^2)}`.
pub fn spher_heat_limit_check(lambda: f64, t: f64, n: u32, cfg: &LimitConfig) -> Result<LimitReport> {
    let p = HeatPairing::single(n, lambda, t)?;
    let values = pairing_values(&p, cfg)?;
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("t".to_string(), t);
    params.insert("lambda".to_string(), lambda);
    params.insert("eps".to_string(), cfg.region.epsilon);
    params.insert("A".to_string(), cfg.region.a);
    params.insert("detour".to_string(), cfg.detour);
    limit_report(params, &cfg.targets, &values, Some(p.limit()))
}

/// `int_R |f^|^2 e^{-t(lambda^2+n^2)} phi_lambda(ir) dmu`.
pub fn orbital_integral(p: &SpectralProfile, t: f64, r: Complex64) -> Result<Complex64> {
    let w = isometry_weights(p, t);
    let mut phi = vec![Complex64::new(0.0, 0.0); w.len()];
    spherical::spherical(p.n).imag.eval_many(&p.grid.lambdas, r, &mut phi)?;
    Ok(phi.iter().zip(&w).map(|(a, b)| a * b).sum())
}

/// `2 w mu(lambda) |f^|^2 e^{-t(lambda^2+n^2)}` per node.
pub fn isometry_weights(p: &SpectralProfile, t: f64) -> Vec<Complex64> {
    let n2 = (p.n * p.n) as f64;
    p.measure()
        .iter()
        .zip(&p.values)
        .map(|((l, m), v)| Complex64::new(m * v.norm_sqr() * (-t * (l * l + n2)).exp(), 0.0))
        .collect()
}

/// `2 w mu(lambda) f^ e^{-t(lambda^2+n^2)/2}` per node.
pub fn inversion_weights(p: &SpectralProfile, t: f64) -> Vec<Complex64> {
    let n2 = (p.n * p.n) as f64;
    p.measure()
        .iter()
        .zip(&p.values)
        .map(|((l, m), v)| v * (m * (-0.5 * t * (l * l + n2)).exp()))
        .collect()
}

pub fn isometry_pairing(p: &SpectralProfile, t: f64) -> Result<HeatPairing> {
    HeatPairing::new(p.n, t, &p.grid.lambdas, &isometry_weights(p, t))
}

/// The inner integral here is the spherical-heat pairing at time `t/2`.
pub fn inversion_pairing(p: &SpectralProfile, t: f64) -> Result<HeatPairing> {
    HeatPairing::new(p.n, 0.5 * t, &p.grid.lambdas, &inversion_weights(p, t))
}

/// `I(R)` along `path`.
pub fn isometry_i(p: &SpectralProfile, t: f64, path: &ContourPath, tol: Tolerance) -> Result<(Complex64, f64)> {
    isometry_pairing(p, t)?.integrate(&path.segments, tol)
}

/// `J(R)` along `path`.
pub fn inversion_j(p: &SpectralProfile, t: f64, path: &ContourPath, tol: Tolerance) -> Result<(Complex64, f64)> {
    inversion_pairing(p, t)?.integrate(&path.segments, tol)
}

fn run_params(p: &SpectralProfile, t: f64, cfg: &LimitConfig) -> BTreeMap<String, f64> {
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), p.n as f64);
    params.insert("t".to_string(), t);
    params.insert("eps".to_string(), cfg.region.epsilon);
    params.insert("A".to_string(), cfg.region.a);
    params.insert("detour".to_string(), cfg.detour);
    params.insert("lambda_max".to_string(), p.grid.lambda_max);
    params.insert("C_n".to_string(), p.density.constant);
    params
}

/// `lim I(R)` against `||f||^2`.
pub fn isometry_limit(p: &SpectralProfile, t: f64, cfg: &LimitConfig) -> Result<LimitReport> {
    let pairing = isometry_pairing(p, t)?;
    let values = pairing_values(&pairing, cfg)?;
    let target = Complex64::new(spectral::plancherel_norm(p), 0.0);
    let mut report = limit_report(run_params(p, t, cfg), &cfg.targets, &values, Some(target))?;
    let forms = BoundaryForms::new(p.n, t)?;
    let bmax = cfg
        .targets
        .iter()
        .map(|r| forms.weighted_max(&p.grid.lambdas, *r))
        .collect::<Result<Vec<f64>>>()?;
    report.boundary_max = Some(bmax);
    Ok(report)
}

/// `lim J(R)` against `f(0)`.
pub fn inversion_limit(p: &SpectralProfile, t: f64, cfg: &LimitConfig) -> Result<LimitReport> {
    let pairing = inversion_pairing(p, t)?;
    let values = pairing_values(&pairing, cfg)?;
    let target = spectral::inverse_transform(p, 0.0)?.value;
    limit_report(run_params(p, t, cfg), &cfg.targets, &values, Some(target))
}

/// The pieces of the integration by parts in the inner pairing
/// (`f = phi_lambda(i.)`, `g = w_t`):
/// `B_k = -(c_k/(2k+1)) sin^{2k+1}(R) f_k(R) (L^k w_t)(R)`.
#[derive(Debug, Clone)]
pub struct BoundaryForms {
    pub n: u32,
    pub t: f64,
    f_k: Vec<RadialExpr>,
    l_k: Vec<Arc<NumExpr>>,
    w_t: Arc<NumExpr>,
}

impl BoundaryForms {
    pub fn new(n: u32, t: f64) -> Result<Self> {
        let sph = spherical::spherical(n);
        let w = kernels::w(t, n)?;
        let mut f_k = Vec::new();
        let mut l_k = Vec::new();
        let mut lw = w.clone();
        for k in 0..n {
            f_k.push(shift::partial_d(&sph.imag, n, k, Flavor::Circular)?);
            l_k.push(lw.numeric());
            lw = lw.apply_l();
        }
        Ok(BoundaryForms {
            n,
            t,
            f_k,
            l_k,
            w_t: w.numeric(),
        })
    }

    /// `B_k(lambda_i, R)` for every node and `k`, as `[k][i]`.
    pub fn terms(&self, lambdas: &[f64], r: Complex64) -> Result<Vec<Vec<Complex64>>> {
        let s = r.sin();
        let mut out = Vec::with_capacity(self.n as usize);
        for k in 0..self.n {
            let mut fk = vec![Complex64::new(0.0, 0.0); lambdas.len()];
            self.f_k[k as usize].eval_many(lambdas, r, &mut fk)?;
            let ck = shift::surface_constant(k).to_f64() / (2 * k + 1) as f64;
            let g = self.l_k[k as usize].eval_guarded(r, 1e-8)?;
            let factor = -ck * s.powi(2 * k as i32 + 1) * g;
            out.push(fk.into_iter().map(|f| f * factor).collect());
        }
        Ok(out)
    }

    /// `max_lambda e^{-t(lambda^2+n^2)} |sum_k B_k(lambda, R)|`.
    pub fn weighted_max(&self, lambdas: &[f64], r: Complex64) -> Result<f64> {
        let terms = self.terms(lambdas, r)?;
        let n2 = (self.n * self.n) as f64;
        Ok(lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let b: Complex64 = terms.iter().map(|row| row[i]).sum();
                b.norm() * (-self.t * (l * l + n2)).exp()
            })
            .fold(0.0, f64::max))
    }

    /// `2 int_0^R sum_i w_i cosh(lambda_i r) w_t(r) dr` along the segment
    /// `[0, R]` (the integrand is entire).
    pub fn bulk(&self, lambdas: &[f64], weights: &[Complex64], r_end: Complex64, tol: Tolerance) -> Result<(Complex64, f64)> {
        integrate_path_scalar(
            &[Segment::line(Complex64::new(0.0, 0.0), r_end)],
            |z| {
                let s: Complex64 = lambdas.iter().zip(weights).map(|(l, w)| w * (z * l).cosh()).sum();
                Ok(2.0 * s * self.w_t.eval_closed(z))
            },
            tol,
        )
    }
}

/// `I(R)` split into the entire bulk term and the boundary terms.
#[derive(Debug, Clone, PartialEq)]
pub struct IbpSplit {
    pub bulk: Complex64,
    pub bulk_error: f64,
    /// Spectrally integrated `B_k`, one per `k`.
    pub boundary: Vec<Complex64>,
}

impl IbpSplit {
    pub fn total(&self) -> Complex64 {
        self.bulk + self.boundary.iter().sum::<Complex64>()
    }
}

pub fn isometry_ibp(p: &SpectralProfile, t: f64, r: Complex64, tol: Tolerance) -> Result<IbpSplit> {
    let forms = BoundaryForms::new(p.n, t)?;
    let w = isometry_weights(p, t);
    let (bulk, bulk_error) = forms.bulk(&p.grid.lambdas, &w, r, tol)?;
    let terms = forms.terms(&p.grid.lambdas, r)?;
    let boundary = terms.iter().map(|row| row.iter().zip(&w).map(|(b, w)| b * w).sum()).collect();
    Ok(IbpSplit {
        bulk,
        bulk_error,
        boundary,
    })
}

/// Fit `C` in `|sum_k B_k(lambda, R)| <= C e^{t lambda^2} / |R|` over
/// `lambda > 1` on the grid and the given targets.
pub fn boundary_constant(n: u32, t: f64, lambdas: &[f64], targets: &[Complex64]) -> Result<f64> {
    let forms = BoundaryForms::new(n, t)?;
    let lams: Vec<f64> = lambdas.iter().copied().filter(|l| *l > 1.0).collect();
    let mut c: f64 = 0.0;
    for r in targets {
        let terms = forms.terms(&lams, *r)?;
        for (i, l) in lams.iter().enumerate() {
            let b: Complex64 = terms.iter().map(|row| row[i]).sum();
            c = c.max(b.norm() * r.norm() * (-t * l * l).exp());
        }
    }
    Ok(c)
}

/// `e^{tn^2/2} int_R [int cosh(lambda y) e^{-t(lambda^2+n^2)/2} f^ dmu] g_t(y) dy`.
///
/// After cancelling the exponentials each node contributes
/// `f^ mu (G(y - t lambda) + G(y + t lambda))/2` with `G` the heat kernel
/// of the line, which keeps the integrand bounded.
pub fn general_inversion_rank1(p: &SpectralProfile, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let m = p.measure();
    let norm = (2.0 * PI * t).sqrt().recip();
    let y_max = t * p.grid.lambda_max + 40.0 * t.sqrt();
    let (re, e1) = integrate_real(
        0.0,
        y_max,
        |y| {
            let s: f64 = m
                .iter()
                .zip(&p.values)
                .map(|((l, w), v)| {
                    let a = y - t * l;
                    let b = y + t * l;
                    w * v.re * 0.5 * ((-a * a / (2.0 * t)).exp() + (-b * b / (2.0 * t)).exp())
                })
                .sum();
            2.0 * s * norm
        },
        Tolerance::new(0.0, 1e-12),
    )?;
    Ok((re, e1))
}

/// Outcome of the surjectivity diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Surjectivity {
    /// `1/eps` for each cutoff.
    pub cutoffs: Vec<f64>,
    /// `lim_R I(R; F_eps)` per cutoff.
    pub partial: Vec<f64>,
    /// Closed form `int_{lambda < 1/eps} |F^|^2 e^{t(lambda^2+n^2)} dmu`.
    pub spectral: Vec<f64>,
    /// `F^ e^{t(lambda^2+n^2)/2}`.
    pub recovered: SpectralProfile,
}

/// Relative increment below which the monotone partial integrals count as
/// converged.
pub const SURJECTIVITY_CONVERGED: f64 = 1e-6;

/// Partial limits `lim_R I(R; F_eps)` for decreasing cutoffs `eps`.
pub fn surjectivity_diagnostic(q: &SpectralProfile, t: f64, epsilons: &[f64], cap: f64, cfg: &LimitConfig) -> Result<Surjectivity> {
    if epsilons.len() < 3 || epsilons.windows(2).any(|w| !(w[1] < w[0])) || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("need at least three positive, decreasing cutoffs".into()));
    }
    let n2 = (q.n * q.n) as f64;
    let mut cutoffs = Vec::new();
    let mut partial = Vec::new();
    let mut spectral_vals = Vec::new();
    for eps in epsilons {
        let cut = eps.recip();
        let qe = q.truncated(cut);
        // |F^|^2 weights with no extra heat factor: I(R; F) pairs |F^|^2 with P(lambda, t).
        let weights: Vec<Complex64> = qe.measure().iter().zip(&qe.values).map(|((_, m), v)| Complex64::new(m * v.norm_sqr(), 0.0)).collect();
        let pairing = HeatPairing::new(q.n, t, &qe.grid.lambdas, &weights)?;
        let values = pairing_values(&pairing, cfg)?;
        let vs: Vec<Complex64> = values.iter().map(|v| v.0).collect();
        let lim = extrapolate(&cfg.targets, &vs).re;
        let closed: f64 = qe.integrate(|l, v| Complex64::new(v.norm_sqr() * (t * (l * l + n2)).exp(), 0.0)).0.re;
        cutoffs.push(cut);
        partial.push(lim);
        spectral_vals.push(closed);
    }
    let k = partial.len();
    let last = partial[k - 1];
    let rising = partial[k - 3] < partial[k - 2] && partial[k - 2] < partial[k - 1];
    if last > cap && rising {
        return Err(Error::DivergenceDetected { last, cap });
    }
    let step = (partial[k - 1] - partial[k - 2]).abs();
    if step > SURJECTIVITY_CONVERGED * last.abs().max(f64::MIN_POSITIVE) && last != 0.0 {
        return Err(Error::NonConvergence(format!("partial integrals still moving by {step:e} at cutoff {}", cutoffs[k - 1])));
    }
    let recovered = q.map_values(|l, v| v * (0.5 * t * (l * l + n2)).exp());
    Ok(Surjectivity {
        cutoffs,
        partial,
        spectral: spectral_vals,
        recovered,
    })
}

/// Fitted constant of `sup |e^{lambda R} R^m e^{-a R^2/2}| <= C (1 + lambda^m) e^{lambda^2/(2a)}`
/// over `R` in `region` on a grid of spacing `h`.
pub fn gauss_sup_constant(a: f64, m: u32, lambdas: &[f64], region: &PoleRegion, h: f64) -> f64 {
    let lmax = lambdas.iter().cloned().fold(0.0, f64::max);
    let x_max = lmax / a + 12.0 / a.sqrt() + 1.0;
    let nx = (x_max / h).ceil() as usize;
    let ny = (2.0 * region.a / h).ceil() as usize;
    let mut c: f64 = 0.0;
    for &l in lambdas {
        let mut sup: f64 = 0.0;
        for ix in 1..=nx {
            let x = ix as f64 * h;
            for iy in 0..=ny {
                let y = -region.a + 2.0 * region.a * iy as f64 / ny as f64;
                let r = Complex64::new(x, y);
                if !region.contains(r) {
                    continue;
                }
                // log-magnitude to avoid overflow
                let lg = l * x + m as f64 * r.norm().ln() - 0.5 * a * (x * x - y * y);
                sup = sup.max(lg);
            }
        }
        let bound = (1.0 + l.powi(m as i32)).ln() + l * l / (2.0 * a);
        c = c.max((sup - bound).exp());
    }
    c
}

/// Result of a refinement-stability check on a fitted constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub coarse: f64,
    pub fine: f64,
}

impl FittedConstant {
    pub fn stable(&self, rel: f64) -> bool {
        self.coarse.is_finite() && self.fine.is_finite() && self.coarse > 0.0 && (self.fine - self.coarse).abs() <= rel * self.coarse
    }
}

pub fn gauss_sup_bound_check(a: f64, m: u32, lambdas: &[f64], region: &PoleRegion) -> FittedConstant {
    FittedConstant {
        coarse: gauss_sup_constant(a, m, lambdas, region, 0.02),
        fine: gauss_sup_constant(a, m, lambdas, region, 0.01),
    }
}

/// Sample points of `S_{eps,A}` with `0 < Re r <= r_max`: a `k x k`
/// lattice plus `4k` points on each excluded circle, just outside radius
/// `eps`, where the estimate is tightest. `2k - 1` refines `k`.
pub fn region_samples(region: &PoleRegion, r_max: f64, k: usize) -> Vec<Complex64> {
    let k = k.max(2);
    let mut pts = Vec::new();
    let h = (k - 1) as f64;
    for ix in 1..k {
        for iy in 0..k {
            let r = Complex64::new(r_max * ix as f64 / h, region.a * 0.95 * (2.0 * iy as f64 / h - 1.0));
            if region.contains(r) {
                pts.push(r);
            }
        }
    }
    let rho = region.epsilon * (1.0 + 1e-6);
    let mut m = 1.0;
    while m * PI - rho < r_max {
        let arcs = 4 * (k - 1);
        for j in 0..arcs {
            let r = Complex64::new(m * PI, 0.0) + Complex64::from_polar(rho, 2.0 * PI * j as f64 / arcs as f64);
            if r.re <= r_max && region.contains(r) {
                pts.push(r);
            }
        }
        m += 1.0;
    }
    pts
}

/// Fitted constant `C_{n,l}` in the spherical-function estimate: the
/// largest ratio of `|d^l/dr^l phi_lambda(ir)|` to the bound with unit
/// constant over `k` values of `lambda in [0, lambda_max]` and
/// [`region_samples`].
pub fn spherical_estimate_constant(n: u32, l: u32, region: &PoleRegion, lambda_max: f64, r_max: f64, k: usize) -> Result<f64> {
    let expr = spherical::spherical(n).imag_derivative(l);
    let k = k.max(2);
    let lams: Vec<f64> = (0..k).map(|i| lambda_max * i as f64 / (k - 1) as f64).collect();
    let pts = region_samples(region, r_max, k);
    let ratios = exec::try_map(&pts, |r| -> Result<f64> {
        let mut vals = vec![Complex64::new(0.0, 0.0); lams.len()];
        expr.eval_many(&lams, *r, &mut vals)?;
        Ok(lams
            .iter()
            .zip(&vals)
            .map(|(lam, v)| v.norm() / spherical::estimate_rhs(*lam, *r, l, n, 1.0))
            .fold(0.0, f64::max))
    })?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Spherical-estimate constant on a grid and its refinement.
pub fn spherical_estimate_check(n: u32, l: u32, region: &PoleRegion, lambda_max: f64, r_max: f64, k: usize) -> Result<FittedConstant> {
    Ok(FittedConstant {
        coarse: spherical_estimate_constant(n, l, region, lambda_max, r_max, k)?,
        fine: spherical_estimate_constant(n, l, region, lambda_max, r_max, 2 * k - 1)?,
    })
}

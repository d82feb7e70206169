//! Quadrature on real intervals and on piecewise complex paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_708_445_135_712,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// The 21 Kronrod abscissae on `[-1, 1]` with their weights.
pub fn kronrod21() -> ([f64; 21], [f64; 21]) {
    let mut x = [0.0; 21];
    let mut w = [0.0; 21];
    for i in 0..10 {
        x[i] = -XGK[i];
        w[i] = WGK[i];
        x[20 - i] = XGK[i];
        w[20 - i] = WGK[i];
    }
    x[10] = 0.0;
    w[10] = WGK[10];
    (x, w)
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let n = NonZeroUsize::new(n).expect("at least one node");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|&(x, w)| (mid + half * x, half * w)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Composite 21-point Kronrod rule on `panels` equal pieces of `[a, b]`.
pub fn composite_kronrod(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = kronrod21();
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(21 * panels);
    let mut weights = Vec::with_capacity(21 * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for i in 0..21 {
            nodes.push(lo + 0.5 * h * (x[i] + 1.0));
            weights.push(0.5 * h * w[i]);
        }
    }
    (nodes, weights)
}

/// Weights of the embedded 10-point Gauss rule on the nodes of
/// [`composite_kronrod`] (zero at the Kronrod-only nodes).
pub fn composite_gauss_embedded(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, _) = composite_kronrod(a, b, panels);
    let h = (b - a) / panels as f64;
    let mut local = [0.0; 21];
    for j in (1..10).step_by(2) {
        local[j] = WG[j / 2];
        local[20 - j] = WG[j / 2];
    }
    let weights = (0..panels).flat_map(|_| local.iter().map(move |w| 0.5 * h * w)).collect();
    (nodes, weights)
}

/// One piece of an integration path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: Complex64, to: Complex64 },
    /// `center + radius * exp(i theta)`, `theta` running from `theta0` to `theta1`.
    Arc {
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Segment {
    pub fn line(from: Complex64, to: Complex64) -> Self {
        Segment::Line { from, to }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Segment::Line {
            from: Complex64::new(a, 0.0),
            to: Complex64::new(b, 0.0),
        }
    }

    /// Upper half circle from `center - radius` to `center + radius`.
    pub fn upper_arc(center: f64, radius: f64) -> Self {
        Segment::Arc {
            center: Complex64::new(center, 0.0),
            radius,
            theta0: PI,
            theta1: 0.0,
        }
    }

    /// Point and derivative at parameter `s` in `[0, 1]`.
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * s, to - from),
            Segment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + s * (theta1 - theta0);
                let e = Complex64::from_polar(radius, th);
                (center + e, Complex64::i() * e * (theta1 - theta0))
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> Complex64 {
        self.eval(1.0).0
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => radius * (theta1 - theta0).abs(),
        }
    }
}

/// Stopping rule: component `i` is done when its error estimate is at
/// most `max(abs, rel * int |f_i| |dz|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-13, 1e-12)
    }
}

/// Output of a vector-valued path integral.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIntegral {
    pub values: Vec<Complex64>,
    /// Error estimate per component.
    pub errors: Vec<f64>,
    /// `int |f_i| |dz|` per component.
    pub magnitudes: Vec<f64>,
    pub intervals: usize,
}

impl PathIntegral {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

struct Piece {
    seg: usize,
    s0: f64,
    s1: f64,
    value: Vec<Complex64>,
    err: Vec<f64>,
    mag: Vec<f64>,
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

fn kronrod_piece<F>(seg: &Segment, s0: f64, s1: f64, dim: usize, f: &mut F, buf: &mut [Complex64]) -> Result<Piece>
where
    F: FnMut(Complex64, &mut [Complex64]) -> Result<()>,
{
    let half = 0.5 * (s1 - s0);
    let mid = 0.5 * (s1 + s0);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    let mut mag = vec![0.0; dim];
    let mut samples: Vec<Vec<Complex64>> = Vec::with_capacity(21);
    let mut evaluate = |x: f64, k: &mut [Complex64], g: &mut [Complex64], mag: &mut [f64], wk: f64, wg: f64| -> Result<Vec<Complex64>> {
        let (z, dz) = seg.eval(mid + half * x);
        f(z, buf)?;
        let scale = dz * half;
        let mut row = Vec::with_capacity(dim);
        for i in 0..dim {
            let v = buf[i] * scale;
            k[i] += v * wk;
            g[i] += v * wg;
            mag[i] += v.norm() * wk;
            row.push(v);
        }
        Ok(row)
    };
    samples.push(evaluate(0.0, &mut k, &mut g, &mut mag, WGK[10], 0.0)?);
    for j in 0..10 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        samples.push(evaluate(XGK[j], &mut k, &mut g, &mut mag, WGK[j], wg)?);
        samples.push(evaluate(-XGK[j], &mut k, &mut g, &mut mag, WGK[j], wg)?);
    }
    // QUADPACK error heuristic applied componentwise.
    let mut err = vec![0.0; dim];
    for i in 0..dim {
        let mean = k[i] * 0.5;
        let mut asc = WGK[10] * (samples[0][i] - mean).norm();
        for j in 0..10 {
            asc += WGK[j] * ((samples[1 + 2 * j][i] - mean).norm() + (samples[2 + 2 * j][i] - mean).norm());
        }
        let diff = (k[i] - g[i]).norm();
        let mut e = diff;
        if asc != 0.0 && diff != 0.0 {
            e = asc * (200.0 * diff / asc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * mag[i];
        err[i] = e.max(floor);
    }
    Ok(Piece {
        seg: 0,
        s0,
        s1,
        value: k,
        err,
        mag,
    })
}

/// Adaptive Gauss-Kronrod integral of a vector-valued `f` along `path`.
///
/// `f(z, out)` writes the `dim` integrand components at `z`. The path
/// parametrisation Jacobian is applied internally.
pub fn integrate_path<F>(path: &[Segment], dim: usize, mut f: F, tol: Tolerance) -> Result<PathIntegral>
where
    F: FnMut(Complex64, &mut [Complex64]) -> Result<()>,
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut pieces: Vec<Piece> = Vec::new();
    for (si, seg) in path.iter().enumerate() {
        let mut p = kronrod_piece(seg, 0.0, 1.0, dim, &mut f, &mut buf)?;
        p.seg = si;
        pieces.push(p);
    }
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut err = vec![0.0; dim];
    let mut mag = vec![0.0; dim];
    for p in &pieces {
        for i in 0..dim {
            total[i] += p.value[i];
            err[i] += p.err[i];
            mag[i] += p.mag[i];
        }
    }
    let target = |mag: &[f64]| -> Vec<f64> { mag.iter().map(|m| tol.abs.max(tol.rel * m)).collect() };
    let key = |p: &Piece, t: &[f64]| -> f64 { p.err.iter().zip(t).map(|(e, t)| e / t).fold(0.0, f64::max) };
    let mut t = target(&mag);
    let mut heap: BinaryHeap<Key> = pieces.iter().enumerate().map(|(i, p)| Key(key(p, &t), i)).collect();
    let done = |err: &[f64], t: &[f64]| err.iter().zip(t).all(|(e, t)| e <= t);
    let mut alive = pieces.len();
    while !done(&err, &t) {
        if alive >= tol.max_intervals {
            let achieved = err.iter().zip(&mag).map(|(e, m)| e / m.max(1e-300)).fold(0.0, f64::max);
            return Err(Error::ToleranceNotMet {
                achieved,
                requested: tol.rel.max(tol.abs),
            });
        }
        let Some(Key(_, idx)) = heap.pop() else { break };
        let (seg, s0, s1) = (pieces[idx].seg, pieces[idx].s0, pieces[idx].s1);
        let sm = 0.5 * (s0 + s1);
        let mut left = kronrod_piece(&path[seg], s0, sm, dim, &mut f, &mut buf)?;
        let mut right = kronrod_piece(&path[seg], sm, s1, dim, &mut f, &mut buf)?;
        left.seg = seg;
        right.seg = seg;
        for i in 0..dim {
            total[i] += left.value[i] + right.value[i] - pieces[idx].value[i];
            err[i] += left.err[i] + right.err[i] - pieces[idx].err[i];
            mag[i] += left.mag[i] + right.mag[i] - pieces[idx].mag[i];
            err[i] = err[i].max(0.0);
        }
        // Targets move with the magnitudes; refresh them now and then.
        if alive.is_multiple_of(64) {
            t = target(&mag);
        }
        pieces[idx] = left;
        heap.push(Key(key(&pieces[idx], &t), idx));
        pieces.push(right);
        let last = pieces.len() - 1;
        heap.push(Key(key(&pieces[last], &t), last));
        alive += 1;
        if heap.is_empty() {
            break;
        }
    }
    // Recompute the sums exactly from the final partition.
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    let mut errors = vec![0.0; dim];
    let mut magnitudes = vec![0.0; dim];
    for p in &pieces {
        for i in 0..dim {
            values[i] += p.value[i];
            errors[i] += p.err[i];
            magnitudes[i] += p.mag[i];
        }
    }
    Ok(PathIntegral {
        values,
        errors,
        magnitudes,
        intervals: alive,
    })
}

/// Scalar path integral.
pub fn integrate_path_scalar<F>(path: &[Segment], mut f: F, tol: Tolerance) -> Result<(Complex64, f64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let r = integrate_path(
        path,
        1,
        |z, out| {
            out[0] = f(z)?;
            Ok(())
        },
        tol,
    )?;
    Ok((r.values[0], r.errors[0]))
}

/// Adaptive integral of a real function over `[a, b]`.
pub fn integrate_real<F>(a: f64, b: f64, mut f: F, tol: Tolerance) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let (v, e) = integrate_path_scalar(&[Segment::real(a, b)], |z| Ok(Complex64::new(f(z.re), 0.0)), tol)?;
    Ok((v.re, e))
}

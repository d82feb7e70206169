use std::io::Write;

use hypsegal::kernels::{self, KernelKind, ModelParams};
use hypsegal::limits::{self, HeatPairing};
use hypsegal::spectral::{self, SpectralGrid, SpectralProfile, TestProfile};
use hypsegal::spherical::nonzero_pole_distance;
use hypsegal::trigexpr::Flavor;
use num_complex::Complex64;

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Numerics(#[from] hypsegal::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableKind {
    Convergence,
    Kernel,
    Profile,
}

/// Spectral input used by the limit commands and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProfileChoice {
    Gaussian,
    Moment,
    SmoothIndicator,
    /// `e^{-(lambda^2+n^2)/2}`, the transform of the time-1 heat kernel.
    Heat,
}

impl ProfileChoice {
    pub fn profile(self, cfg: &RunConfig) -> Result<SpectralProfile, TableError> {
        let n = cfg.n;
        let tp = match self {
            ProfileChoice::Gaussian => Some(TestProfile::Gaussian),
            ProfileChoice::Moment => Some(TestProfile::Moment),
            ProfileChoice::SmoothIndicator => Some(TestProfile::SmoothIndicator),
            ProfileChoice::Heat => None,
        };
        let grid = match (cfg.lambda_max, tp) {
            (Some(l), _) => SpectralGrid::kronrod(l, spectral::DEFAULT_PANELS)?,
            (None, Some(tp)) => tp.grid()?,
            (None, None) => SpectralGrid::kronrod(14.0, spectral::DEFAULT_PANELS)?,
        };
        let n2 = (n * n) as f64;
        Ok(match tp {
            Some(tp) => SpectralProfile::real(n, grid, |l| tp.eval(l))?,
            None => SpectralProfile::real(n, grid, |l| (-0.5 * (l * l + n2)).exp())?,
        })
    }
}

/// Sample grid for kernel tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    pub kind: KernelKind,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub imag: f64,
    pub complex: bool,
}

impl Default for KernelGrid {
    fn default() -> Self {
        KernelGrid {
            kind: KernelKind::Nu,
            from: 0.0,
            to: 3.0,
            points: 61,
            imag: 0.0,
            complex: false,
        }
    }
}

/// Distance below which a sample point is dropped as a pole.
const POLE_GUARD: f64 = 1e-6;

pub fn kernel_name(kind: KernelKind) -> &'static str {
    match kind {
        KernelKind::Nu => "nu",
        KernelKind::Gamma => "gamma",
        KernelKind::Rho => "rho",
        KernelKind::W => "w",
    }
}

fn kernel_has_poles(kind: KernelKind) -> bool {
    matches!(kind, KernelKind::Nu | KernelKind::Rho)
}

pub fn write_kernel<W: Write>(cfg: &RunConfig, grid: &KernelGrid, mut w: W) -> Result<(), TableError> {
    writeln!(w, "{} kernel={} from={} to={} points={} imag={}", cfg.comment_line(), kernel_name(grid.kind), grid.from, grid.to, grid.points, grid.imag)?;
    let set = kernels::build_kernels(ModelParams::new(cfg.n, cfg.t)?, 8)?;
    let mut csv = csv::Writer::from_writer(w);
    if grid.complex {
        csv.write_record(["re_r", "im_r", "re_value", "im_value"])?;
    } else {
        csv.write_record(["r", "value"])?;
    }
    for i in 0..grid.points {
        let x = if grid.points == 1 { grid.from } else { grid.from + (grid.to - grid.from) * i as f64 / (grid.points - 1) as f64 };
        let r = Complex64::new(x, grid.imag);
        if kernel_has_poles(grid.kind) && nonzero_pole_distance(Flavor::Circular, r) < POLE_GUARD {
            continue;
        }
        let v = set.eval(grid.kind, r)?;
        if grid.complex {
            csv.write_record([r.re.to_string(), r.im.to_string(), v.re.to_string(), v.im.to_string()])?;
        } else {
            csv.write_record([x.to_string(), v.re.to_string()])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Spherical-heat values along the configured targets with the running
/// extrapolation and residual against `e^{t(lambda^2+n^2)}`.
pub fn write_convergence<W: Write>(cfg: &RunConfig, lambda: f64, mut w: W) -> Result<(), TableError> {
    writeln!(w, "{} lambda={lambda}", cfg.comment_line())?;
    let limit = cfg.limit()?;
    let pairing = HeatPairing::single(cfg.n, lambda, cfg.t)?;
    let values = limits::pairing_values(&pairing, &limit)?;
    let exact = pairing.limit();
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["j", "re_R", "im_R", "re_value", "im_value", "re_extrapolated", "residual"])?;
    let vs: Vec<Complex64> = values.iter().map(|v| v.0).collect();
    for (i, (r, v)) in limit.targets.iter().zip(&vs).enumerate() {
        let ex = limits::extrapolate(&limit.targets[..=i], &vs[..=i]);
        let j = (r.re / std::f64::consts::PI - 0.5).round() as i64;
        csv.write_record([
            j.to_string(),
            r.re.to_string(),
            r.im.to_string(),
            v.re.to_string(),
            v.im.to_string(),
            ex.re.to_string(),
            ((ex - exact).norm() / exact.norm()).to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_profile_table<W: Write>(cfg: &RunConfig, p: &SpectralProfile, mut w: W) -> Result<(), TableError> {
    writeln!(w, "{} C_n={}", cfg.comment_line(), p.density.constant)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["lambda", "re_value", "im_value", "density"])?;
    for (l, v) in p.grid.lambdas.iter().zip(&p.values) {
        csv.write_record([l.to_string(), v.re.to_string(), v.im.to_string(), p.density.density(*l).to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

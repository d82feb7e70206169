use std::collections::BTreeMap;

use hypsegal::verify::{self, Check, Scope};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{RunConfig, SuiteName};

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Numerics(#[from] hypsegal::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<Check> for CheckResult {
    fn from(c: Check) -> Self {
        CheckResult {
            passed: c.passed(),
            criterion: c.criterion,
            name: c.name,
            measured: c.measured,
            tolerance: c.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub config: BTreeMap<&'static str, String>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Scope of a run: the configured `(n, t)`, the configured contour
/// geometry, and the fixed sample points plus ten drawn from `seed`.
pub fn scope(cfg: &RunConfig) -> Result<Scope, SuiteError> {
    if cfg.n == 0 {
        return Err(crate::config::ConfigError::Invalid("suites need n >= 1".into()).into());
    }
    let mut points = verify::complex_points();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..10 {
        points.push(Complex64::new(rng.random_range(0.1..2.8), rng.random_range(-0.3..0.3)));
    }
    Ok(Scope {
        ns: vec![cfg.n],
        ts: vec![cfg.t],
        limit: cfg.limit()?,
        points,
    })
}

fn criteria(name: SuiteName) -> &'static [u8] {
    match name {
        SuiteName::Symbolic => &[1],
        SuiteName::Kernels => &[2, 3],
        SuiteName::Spectral => &[9],
        SuiteName::Isometry => &[4, 5, 6],
        SuiteName::Inversion => &[7],
        SuiteName::Surjectivity => &[8],
        SuiteName::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
    }
}

pub fn run_suite(name: SuiteName, cfg: &RunConfig) -> Result<SuiteReport, SuiteError> {
    cfg.validate()?;
    let scope = scope(cfg)?;
    let mut checks = Vec::new();
    if matches!(name, SuiteName::Spectral | SuiteName::All) {
        checks.extend(verify::spectral_checks(&scope)?);
    }
    for &k in criteria(name) {
        checks.extend(verify::criterion(k, &scope)?);
    }
    let checks: Vec<CheckResult> = checks.into_iter().map(CheckResult::from).collect();
    let passed = checks.iter().all(|c| c.passed);
    let mut config = cfg.echo();
    config.insert("suite", name.as_str().to_string());
    Ok(SuiteReport {
        suite: name,
        config,
        checks,
        passed,
    })
}

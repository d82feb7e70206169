use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hypsegal::limits::{r_sequence, LimitConfig, PoleRegion};
use hypsegal::quad::Tolerance;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which named suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Symbolic,
    Kernels,
    Spectral,
    Isometry,
    Inversion,
    Surjectivity,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Symbolic => "symbolic",
            SuiteName::Kernels => "kernels",
            SuiteName::Spectral => "spectral",
            SuiteName::Isometry => "isometry",
            SuiteName::Inversion => "inversion",
            SuiteName::Surjectivity => "surjectivity",
            SuiteName::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SuiteName::Symbolic,
            SuiteName::Kernels,
            SuiteName::Spectral,
            SuiteName::Isometry,
            SuiteName::Inversion,
            SuiteName::Surjectivity,
            SuiteName::All,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
    }
}

/// Every tunable of a run. Defaults are embedded and echoed into outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub t: f64,
    pub epsilon: f64,
    pub a: f64,
    pub detour: f64,
    /// Largest `Re R` of the target sequence `(j + 1/2) pi + 0.3 i`, `j >= 2`.
    pub rmax: f64,
    /// Spectral cutoff; `None` uses each profile's own.
    pub lambda_max: Option<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub suite: SuiteName,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1,
            t: 0.5,
            epsilon: 0.3,
            a: 1.0,
            detour: 0.5,
            rmax: 8.5 * PI,
            lambda_max: None,
            tol: 1e-12,
            out: None,
            suite: SuiteName::All,
            seed: 0,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::Invalid(format!("{key}: `{v}` is not a number")))
}

impl RunConfig {
    /// Set one key from its textual value (config-file keys match flag names).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "n" => self.n = v.parse().map_err(|_| ConfigError::Invalid(format!("n: `{v}` is not a non-negative integer")))?,
            "t" => self.t = parse_f64(key, v)?,
            "eps" => self.epsilon = parse_f64(key, v)?,
            "A" => self.a = parse_f64(key, v)?,
            "detour" => self.detour = parse_f64(key, v)?,
            "rmax" => self.rmax = parse_f64(key, v)?,
            "lambda-max" => self.lambda_max = Some(parse_f64(key, v)?),
            "tol" => self.tol = parse_f64(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "suite" => self.suite = SuiteName::parse(v).ok_or_else(|| ConfigError::Invalid(format!("unknown suite `{v}`")))?,
            "seed" => self.seed = v.parse().map_err(|_| ConfigError::Invalid(format!("seed: `{v}` is not an unsigned integer")))?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Apply a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            self.set(k.trim(), v).map_err(|e| match e {
                ConfigError::Invalid(msg) => ConfigError::Syntax { line: i + 1, msg },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.epsilon > 0.0 && self.epsilon < self.detour && self.detour < self.a && self.a < PI) {
            return bad(format!(
                "need 0 < eps < detour < A < pi, got eps = {}, detour = {}, A = {}",
                self.epsilon, self.detour, self.a
            ));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if let Some(l) = self.lambda_max {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda-max must be positive, got {l}"));
            }
        }
        if self.targets().len() < 3 {
            return bad(format!("rmax = {} leaves fewer than three targets; use rmax >= {:.3}", self.rmax, 4.5 * PI));
        }
        if self.n > 8 {
            return bad(format!("n = {} is outside the supported range 0..=8", self.n));
        }
        Ok(())
    }

    pub fn targets(&self) -> Vec<Complex64> {
        let jmax = ((self.rmax / PI) - 0.5 + 1e-12).floor();
        if jmax < 2.0 {
            return Vec::new();
        }
        r_sequence(2..=jmax as u32, 0.3)
    }

    pub fn limit(&self) -> Result<LimitConfig, ConfigError> {
        self.validate()?;
        let region = PoleRegion::new(self.epsilon, self.a).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(LimitConfig {
            region,
            detour: self.detour,
            targets: self.targets(),
            tol: Tolerance::new(0.0, self.tol),
        })
    }

    /// All settings as ordered key/value pairs.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("n", self.n.to_string());
        m.insert("t", self.t.to_string());
        m.insert("eps", self.epsilon.to_string());
        m.insert("A", self.a.to_string());
        m.insert("detour", self.detour.to_string());
        m.insert("rmax", self.rmax.to_string());
        m.insert("lambda-max", self.lambda_max.map_or("auto".to_string(), |l| l.to_string()));
        m.insert("tol", self.tol.to_string());
        m.insert("suite", self.suite.as_str().to_string());
        m.insert("seed", self.seed.to_string());
        m
    }

    /// One-line `# key=value ...` comment for CSV outputs.
    pub fn comment_line(&self) -> String {
        let parts: Vec<String> = self.echo().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.targets().len(), 7);
    }

    #[test]
    fn file_then_override() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nn = 2\nt=1.0  # time\n\neps = 0.2\n").unwrap();
        assert_eq!((c.n, c.t, c.epsilon), (2, 1.0, 0.2));
        c.set("n", "3").unwrap();
        assert_eq!(c.n, 3);
        assert!(matches!(c.apply_text("bogus = 1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("n 1"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut c = RunConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.epsilon = 0.6;
        assert!(c.validate().is_err());
        let c = RunConfig {
            rmax: 5.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}

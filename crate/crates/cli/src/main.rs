use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hypsegal::exec::{self, Exec};
use hypsegal::kernels::KernelKind;
use hypsegal::limits::{self, LimitReport};
use hypsegal::spectral;
use hypsegal_cli::table::{self, KernelGrid};
use hypsegal_cli::{run_suite, ProfileChoice, RunConfig, SuiteName, TableKind};

#[derive(Parser)]
#[command(name = "hypsegal", version, about = "Heat-kernel transforms and their limits on odd-dimensional hyperbolic space")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long = "A", global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    detour: Option<f64>,
    /// Largest Re R of the target sequence
    #[arg(long, global = true)]
    rmax: Option<f64>,
    #[arg(long = "lambda-max", global = true)]
    lambda_max: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run single-threaded
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    Nu,
    Gamma,
    Rho,
    W,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a heat kernel
    Kernel {
        #[arg(long, value_enum, default_value = "nu")]
        flavor: Flavor,
        #[arg(long, value_enum, default_value = "csv")]
        emit: Emit,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
        /// Imaginary part of every sample point
        #[arg(long, default_value_t = 0.0)]
        imag: f64,
        /// Write (Re r, Im r, Re v, Im v)
        #[arg(long)]
        complex: bool,
    },
    /// Spectral profile as CSV, or its inverse transform at given radii.
    /// An explicit --t applies the heat multiplier e^{-t(lambda^2+n^2)/2}.
    Transform {
        /// Profile CSV to read instead of a built-in profile
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: ProfileChoice,
        /// Radii at which to evaluate the inverse transform
        #[arg(long, value_delimiter = ',')]
        inverse: Vec<f64>,
    },
    /// Limit of I(R) against the Plancherel norm
    Isometry {
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: ProfileChoice,
    },
    /// Limit of J(R) against f(0)
    Inversion {
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: ProfileChoice,
    },
    /// Limit of the spherical-heat pairing against e^{t(lambda^2+n^2)}
    Spherheat {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Run a verification suite; exit status 0 iff every check passes
    Suite {
        #[arg(long, value_enum)]
        suite: Option<SuiteName>,
    },
    /// Emit a CSV table
    Table {
        #[arg(long, value_enum)]
        kind: TableKind,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "gaussian")]
        profile: ProfileChoice,
    },
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        cfg.apply_file(path)?;
    }
    macro_rules! over {
        ($field:ident) => {
            if let Some(v) = c.$field {
                cfg.$field = v;
            }
        };
    }
    over!(n);
    over!(t);
    over!(detour);
    over!(rmax);
    over!(tol);
    over!(seed);
    if let Some(v) = c.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = c.a {
        cfg.a = v;
    }
    if c.lambda_max.is_some() {
        cfg.lambda_max = c.lambda_max;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_report(cfg: &RunConfig, report: &LimitReport) -> Result<()> {
    let mut w = output(cfg.out.as_deref())?;
    writeln!(w, "{}", report.to_json()?)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = build_config(&cli.common)?;
    if cli.common.sequential {
        exec::set(Exec::Sequential);
    }
    match cli.command {
        Command::Kernel {
            flavor,
            emit: Emit::Csv,
            from,
            to,
            points,
            imag,
            complex,
        } => {
            let kind = match flavor {
                Flavor::Nu => KernelKind::Nu,
                Flavor::Gamma => KernelKind::Gamma,
                Flavor::Rho => KernelKind::Rho,
                Flavor::W => KernelKind::W,
            };
            let grid = KernelGrid {
                kind,
                from,
                to,
                points,
                imag,
                complex,
            };
            table::write_kernel(&cfg, &grid, output(cfg.out.as_deref())?)?;
        }
        Command::Transform { input, profile, inverse } => {
            let mut p = match &input {
                Some(path) => {
                    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    spectral::read_profile(f).with_context(|| format!("reading {}", path.display()))?
                }
                None => profile.profile(&cfg)?,
            };
            if let Some(t) = cli.common.t {
                p = spectral::heat_multiplier(&p, t)?;
            }
            let mut w = output(cfg.out.as_deref())?;
            if inverse.is_empty() {
                spectral::write_profile(&p, &mut w)?;
            } else {
                writeln!(w, "{}", cfg.comment_line())?;
                writeln!(w, "r,value,quad_error,tail")?;
                for r in inverse {
                    let inv = spectral::inverse_transform(&p, r)?;
                    writeln!(w, "{r},{},{},{}", inv.value.re, inv.quad_error, inv.tail)?;
                }
            }
            w.flush()?;
        }
        Command::Isometry { profile } => {
            let p = profile.profile(&cfg)?;
            write_report(&cfg, &limits::isometry_limit(&p, cfg.t, &cfg.limit()?)?)?;
        }
        Command::Inversion { profile } => {
            let p = profile.profile(&cfg)?;
            write_report(&cfg, &limits::inversion_limit(&p, cfg.t, &cfg.limit()?)?)?;
        }
        Command::Spherheat { lambda } => {
            write_report(&cfg, &limits::spher_heat_limit_check(lambda, cfg.t, cfg.n, &cfg.limit()?)?)?;
        }
        Command::Suite { suite } => {
            let name = suite.unwrap_or(cfg.suite);
            let report = run_suite(name, &cfg)?;
            let mut w = output(cfg.out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
            w.flush()?;
            for c in report.failures() {
                eprintln!("FAIL [{}] {}: {:e} > {:e}", c.criterion, c.name, c.measured, c.tolerance);
            }
            return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Table { kind, lambda, profile } => {
            let w = output(cfg.out.as_deref())?;
            match kind {
                TableKind::Convergence => table::write_convergence(&cfg, lambda, w)?,
                TableKind::Kernel => table::write_kernel(&cfg, &KernelGrid::default(), w)?,
                TableKind::Profile => table::write_profile_table(&cfg, &profile.profile(&cfg)?, w)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

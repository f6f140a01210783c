//! `crsphere`: constants, verification suites, minimizer runs, probes,
//! log-HLS and eigenvalue reports.

mod commands;
mod report;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Geometry,
    Spectral,
    Kernels,
    Adams,
    Functionals,
    All,
}

/// Weight or density on the sphere: `one`, `jacobian:<s>` (the axial
/// Jacobian `C/|1 - s ζ_{n+1}|^Q`) or `random:<amp>` (a seeded smooth weight).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    One,
    Jacobian(f64),
    Random(f64),
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "one" {
            return Ok(WeightSpec::One);
        }
        let (kind, val) = s.split_once(':').ok_or_else(|| format!("expected one, jacobian:<s> or random:<amp>, got {s}"))?;
        let v: f64 = val.parse().map_err(|_| format!("invalid number in {s}"))?;
        match kind {
            "jacobian" if v.abs() < 1.0 => Ok(WeightSpec::Jacobian(v)),
            "jacobian" => Err(format!("jacobian parameter must satisfy |s| < 1, got {v}")),
            "random" if v >= 0.0 => Ok(WeightSpec::Random(v)),
            "random" => Err(format!("random amplitude must be nonnegative, got {v}")),
            _ => Err(format!("unknown weight kind {kind}")),
        }
    }
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSpec::One => write!(f, "one"),
            WeightSpec::Jacobian(s) => write!(f, "jacobian:{s}"),
            WeightSpec::Random(a) => write!(f, "random:{a}"),
        }
    }
}

/// Options shared by all commands; unset values fall back to per-command defaults.
#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    /// Complex dimension parameter of S^{2n+1}.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,
    /// Operator order (default Q/2, or 2 for the probe).
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Coefficient a of L_{a,b} (default 1).
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Coefficient b of L_{a,b}.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub b: f64,
    /// Parameter λ of A_n(λ).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,
    /// Truncation degree (per-command default).
    #[arg(long, global = true)]
    pub jmax: Option<usize>,
    /// Radial nodes of the disk rule.
    #[arg(long = "quad-disk", global = true)]
    pub quad_disk: Option<usize>,
    /// Size parameter of the sphere rule.
    #[arg(long = "quad-sphere", global = true)]
    pub quad_sphere: Option<usize>,
    /// Panels of the graded rule on Σ.
    #[arg(long = "quad-sigma", global = true)]
    pub quad_sigma: Option<usize>,
    /// Gradient tolerance of the minimizer.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for all random inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Degree of the random initial function of the minimizer.
    #[arg(long, global = true, default_value_t = 6)]
    pub degree: usize,
    /// Probe factors (comma separated).
    #[arg(long, global = true, value_delimiter = ',', default_value = "1.0")]
    pub factor: Vec<f64>,
    /// Probe truncation levels m (comma separated).
    #[arg(long, global = true, value_delimiter = ',', default_value = "4,8,16")]
    pub m: Vec<usize>,
    /// Weight for `eigen` or density for `hls`.
    #[arg(long = "W", global = true, default_value = "one")]
    pub w: WeightSpec,
    /// Report path; tables go next to it as `<stem>.<table>.csv`. Prints to stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings in the report (makes it run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
}

impl RunConfig {
    fn echo(&self, extra: &[(&str, Value)]) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("n".into(), json!(self.n));
        m.insert("d".into(), json!(self.d));
        m.insert("a".into(), json!(self.a));
        m.insert("b".into(), json!(self.b));
        m.insert("lambda".into(), json!(self.lambda));
        m.insert("jmax".into(), json!(self.jmax));
        m.insert("quad_disk".into(), json!(self.quad_disk));
        m.insert("quad_sphere".into(), json!(self.quad_sphere));
        m.insert("quad_sigma".into(), json!(self.quad_sigma));
        m.insert("tol".into(), json!(self.tol));
        m.insert("seed".into(), json!(self.seed));
        m.insert("degree".into(), json!(self.degree));
        m.insert("factor".into(), json!(self.factor));
        m.insert("m".into(), json!(self.m));
        m.insert("W".into(), json!(self.w.to_string()));
        for (k, v) in extra {
            m.insert((*k).into(), v.clone());
        }
        m
    }
}

#[derive(Debug, Parser)]
#[command(name = "crsphere", version, about = "Sharp constants and conformally invariant functionals on the CR sphere")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constants c_d, C_d, A_{Q/2} by several routes, A(a,b), A_n(λ), k_n.
    Constants,
    /// Run invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Minimize the Beckner-Onofri functional from a random start.
    Minimize,
    /// Exponential integrals along the extremizing sequence.
    Probe,
    /// Log-HLS gap on the sphere and on the Heisenberg group.
    Hls,
    /// Weighted eigenvalues of the conditional intertwinor and the Hersch sum.
    Eigen,
}

/// Failures of a command: bad input (exit 2) or a numerical error (exit 1).
pub enum CmdError {
    Usage(String),
    Numeric(String),
}

impl From<crsphere::Error> for CmdError {
    fn from(e: crsphere::Error) -> Self {
        match e {
            crsphere::Error::InvalidArgument(_) | crsphere::Error::DimensionMismatch { .. } => {
                CmdError::Usage(e.to_string())
            }
            _ => CmdError::Numeric(e.to_string()),
        }
    }
}

fn configure_threads() {
    if let Some(k) = std::env::var("CRSPHERE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore failure if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let cfg = &cli.config;
    if cfg.n == 0 {
        eprintln!("error: --n must be positive");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let result = match &cli.command {
        Command::Constants => commands::constants(cfg),
        Command::Verify { suite } => verify::run(cfg, *suite),
        Command::Minimize => commands::minimize(cfg),
        Command::Probe => commands::probe(cfg),
        Command::Hls => commands::hls(cfg),
        Command::Eigen => commands::eigen(cfg),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(CmdError::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(CmdError::Numeric(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    report.timings.push(("total".into(), start.elapsed().as_secs_f64()));
    if let Err(e) = report.emit(cfg.output.as_deref(), cfg.format == Format::Csv, cfg.timings) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

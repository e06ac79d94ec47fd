//! `skewhowe`: sampling, kernels, limit shapes, gap probabilities and tilings
//! from the command line.
//!
//! Exit codes: 0 on success, 1 on a domain error (a JSON object on stderr),
//! 2 on a usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "skewhowe", version, about = "Random Young diagrams under the skew Howe duality measure")]
pub struct Cli {
    /// Worker threads for sampling (default: all cores). Output does not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw diagrams; one NDJSON line {"seed", "shape"} per sample.
    Sample(SampleArgs),
    /// CSV of u, rho, omega on a uniform grid over [−1, c].
    Limitshape(LimitshapeArgs),
    /// Support intervals, edge classes and Airy scalings as JSON.
    Support(SupportArgs),
    /// One finite-n kernel value K(m, m′) with its error estimate.
    Kernel(KernelArgs),
    /// CSV of Δ, gap probability and point mass for the corner laws.
    Gap(GapArgs),
    /// CSV of s and the GUE Tracy–Widom distribution function.
    Tw(TwArgs),
    /// Render lozenge or Aztec tilings from sampled tableau pairs as SVG.
    Tiling(TilingArgs),
    /// Run a validation suite and print a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Spec JSON file, e.g. {"f":{"family":"constant","alpha":1.0},"g":{"family":"constant","alpha":1.0},"c":2.0}.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Base seed; sample i uses a seed derived from (seed, i), recorded in its line.
    #[arg(long)]
    pub seed: u64,
    /// Also write both tableaux ("p", "q"), as needed by `tiling`.
    #[arg(long)]
    pub tableaux: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LimitshapeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Number of grid points, at least 2.
    #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u32).range(2..))]
    pub grid: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SupportArgs {
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Half-integer position, e.g. 0.5 or −1.5.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_half_integer)]
    pub m: i64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_half_integer)]
    pub mprime: i64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GapMode {
    Hermite,
    Gtw,
}

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long, value_enum)]
    pub mode: GapMode,
    /// Corner parameter of the Hermite kernel.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 10)]
    pub delta_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Truncated,
    Tangent,
}

#[derive(Args, Debug)]
pub struct TwArgs {
    /// Grid `start:end:step`, end included.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub s_grid: Grid,
    #[arg(long, value_enum, default_value_t = Rule::Truncated)]
    pub rule: Rule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Lozenge,
    Aztec,
}

#[derive(Args, Debug)]
pub struct TilingArgs {
    /// NDJSON written by `sample --tableaux`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Directory for `<seed>.svg` files; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Cauchy,
    Oracle,
    Identities,
    Montecarlo,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Experiment JSON, required for `montecarlo`.
    #[arg(long, required_if_eq("suite", "montecarlo"))]
    pub config: Option<PathBuf>,
    /// Random parameter sets for `cauchy` and `oracle`.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Seed for the random parameter sets.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Histogram CSV for `montecarlo` (x, empirical, target).
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err("expected start:end:step".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let g = Grid { start: num(a)?, end: num(b)?, step: num(h)? };
    if !(g.step > 0.0 && g.start.is_finite() && g.end >= g.start && g.end.is_finite()) {
        return Err("need finite start ≤ end and step > 0".into());
    }
    if (g.end - g.start) / g.step > 1e6 {
        return Err("more than a million grid points".into());
    }
    Ok(g)
}

/// Half-integer as its double, which is odd.
fn parse_half_integer(s: &str) -> Result<i64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    let d = 2.0 * v;
    if d.fract() != 0.0 || (d as i64).rem_euclid(2) != 1 || d.abs() > 1e9 {
        return Err(format!("{s} is not a half-integer"));
    }
    Ok(d as i64)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global();
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}

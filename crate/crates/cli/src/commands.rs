//! Subcommand bodies. Everything returns a `CliError`, which `main` turns into
//! a JSON line on stderr and exit code 1.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use skewhowe::exact_oracle::{determinantal_check, dual_cauchy_residual, measure_table, rat, to_f64, Rational};
use skewhowe::fluctuations::{
    gtw_gap, hermite_gap, kernel_equivalence_residual, tracy_widom_cdf_with, verify_df_identities, TwRule,
};
use skewhowe::harness::{run_experiment, ExperimentConfig};
use skewhowe::kernels::FiniteKernel;
use skewhowe::partitions::maya;
use skewhowe::saddle::{EdgeClass, End, Saddle};
use skewhowe::sampler::{derive_seed, sample_pair, Ssyt, XySampler};
use skewhowe::specialization::{x_values, y_values};
use skewhowe::tilings::{aztec_scene, check_exact_cover, gluing_maya, lozenge_scene, render_svg, three_of_four};
use skewhowe::SpecPair;

use crate::{
    Command, GapArgs, GapMode, KernelArgs, Kind, LimitshapeArgs, Rule, SampleArgs, Suite, SupportArgs, TilingArgs,
    TwArgs, ValidateArgs,
};

#[derive(Debug)]
pub enum CliError {
    Domain(skewhowe::Error),
    Io { path: PathBuf, message: String },
    Input(String),
}

impl From<skewhowe::Error> for CliError {
    fn from(e: skewhowe::Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    pub fn to_json(&self) -> String {
        let v = match self {
            CliError::Domain(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            CliError::Io { path, message } => json!({ "error": "Io", "path": path, "message": message }),
            CliError::Input(m) => json!({ "error": "InvalidInput", "message": m }),
        };
        v.to_string()
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })
}

/// To the file if given, else stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })
        }
    }
}

fn load_spec(path: &Path) -> Result<SpecPair> {
    Ok(SpecPair::from_json(&read(path)?)?)
}

pub fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Sample(a) => sample(a),
        Command::Limitshape(a) => limitshape(a),
        Command::Support(a) => support(a),
        Command::Kernel(a) => kernel(a),
        Command::Gap(a) => gap(a),
        Command::Tw(a) => tw(a),
        Command::Tiling(a) => tiling(a),
        Command::Validate(a) => validate(a),
    }
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    seed: u64,
    shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Ssyt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Ssyt>,
}

fn sample(a: &SampleArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let lines: Vec<SampleLine> = if a.tableaux {
        (0..a.samples as u64)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(a.seed, i);
                let pair = sample_pair(&spec, a.n, a.k, seed)?;
                Ok(SampleLine { seed, shape: pair.shape().parts().to_vec(), p: Some(pair.p), q: Some(pair.q) })
            })
            .collect::<skewhowe::Result<_>>()?
    } else {
        XySampler::from_spec(&spec, a.n, a.k)?
            .batch(a.samples, a.seed)
            .into_iter()
            .map(|(seed, p)| SampleLine { seed, shape: p.parts().to_vec(), p: None, q: None })
            .collect()
    };
    let mut text = String::new();
    for l in &lines {
        text.push_str(&serde_json::to_string(l).expect("plain data serializes"));
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}

fn limitshape(a: &LimitshapeArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let sad = Saddle::new(&spec)?;
    let m = a.grid as usize;
    let u: Vec<f64> = (0..m).map(|i| -1.0 + (spec.c + 1.0) * i as f64 / (m - 1) as f64).collect();
    let omega = sad.limit_shape(&u)?;
    let mut text = String::from("u,rho,omega\n");
    for (ui, oi) in u.iter().zip(&omega) {
        let rho = sad.density(*ui)?.rho;
        writeln!(text, "{ui},{rho},{oi}").unwrap();
    }
    emit(a.out.as_deref(), &text)
}

fn support(a: &SupportArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let sad = Saddle::new(&spec)?;
    let report = sad.classify_edges()?;
    let mut airy = Vec::new();
    for (i, iv) in sad.intervals().iter().enumerate() {
        for (end, class) in [(End::Left, iv.left_class), (End::Right, iv.right_class)] {
            if class == EdgeClass::Airy {
                let s = sad.airy_sigma(i, end)?;
                airy.push(json!({ "interval": i, "end": end, "t": s.t, "z_crit": s.z_crit, "sigma": s.sigma }));
            }
        }
    }
    let out = json!({ "intervals": report.intervals, "right_end": report.right_end, "airy": airy });
    emit(None, &format!("{out}\n"))
}

fn kernel(a: &KernelArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let x = x_values(&spec, a.n)?;
    let y = y_values(&spec, a.k)?;
    let v = FiniteKernel::new(&x, &y, a.tol)?.value(a.m, a.mprime)?;
    let out = json!({ "m": a.m as f64 / 2.0, "mprime": a.mprime as f64 / 2.0, "value": v.value, "error_estimate": v.error });
    emit(None, &format!("{out}\n"))
}

fn gap(a: &GapArgs) -> Result<()> {
    let g = |d: usize| match a.mode {
        GapMode::Hermite => hermite_gap(a.s, d),
        GapMode::Gtw => gtw_gap(d),
    };
    let gaps: Vec<f64> = (0..=a.delta_max + 1).map(g).collect();
    let mut text = String::from("delta,gap,pmf\n");
    for d in 0..=a.delta_max {
        writeln!(text, "{d},{},{}", gaps[d], gaps[d] - gaps[d + 1]).unwrap();
    }
    emit(None, &text)
}

fn tw(a: &TwArgs) -> Result<()> {
    let rule = match a.rule {
        Rule::Truncated => TwRule::Truncated,
        Rule::Tangent => TwRule::Tangent,
    };
    let g = a.s_grid;
    let count = ((g.end - g.start) / g.step + 1e-9).floor() as usize + 1;
    let mut text = String::from("s,F\n");
    for i in 0..count {
        let s = g.start + g.step * i as f64;
        writeln!(text, "{s},{}", tracy_widom_cdf_with(s, rule)?).unwrap();
    }
    emit(None, &text)
}

fn tiling(a: &TilingArgs) -> Result<()> {
    let text = read(&a.input)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::Io { path: a.out.clone(), message: e.to_string() })?;
    let mut summary = String::new();
    for (no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let s: SampleLine =
            serde_json::from_str(line).map_err(|e| CliError::Input(format!("line {}: {e}", no + 1)))?;
        let (Some(p), Some(q)) = (s.p, s.q) else {
            return Err(CliError::Input(format!("line {}: no tableaux; produce them with `sample --tableaux`", no + 1)));
        };
        let pair = skewhowe::sampler::TableauPair { p, q };
        let scene = match a.kind {
            Kind::Lozenge => lozenge_scene(&pair, a.n, a.k)?,
            Kind::Aztec => aztec_scene(&pair, a.n, a.k)?,
        };
        let file = a.out.join(format!("{}.svg", s.seed));
        write(&file, &render_svg(&scene))?;
        let cover = check_exact_cover(&scene).is_ok();
        let maya_ok = gluing_maya(&scene) == maya(&pair.shape(), a.n, a.k)?.positions2;
        let three = (a.kind == Kind::Aztec).then(|| three_of_four(&scene));
        let row = json!({ "seed": s.seed, "file": file, "exact_cover": cover, "gluing_maya": maya_ok, "three_of_four": three });
        writeln!(summary, "{row}").unwrap();
    }
    emit(None, &summary)
}

fn random_rationals(state: &mut u64, m: usize) -> Vec<Rational> {
    (0..m)
        .map(|_| {
            *state = derive_seed(*state, 1);
            let a = (*state % 9) as i64 + 1;
            let b = ((*state >> 8) % 9) as i64 + 1;
            rat(a, b)
        })
        .collect()
}

fn validate(a: &ValidateArgs) -> Result<()> {
    let out = match a.suite {
        Suite::Cauchy => {
            let mut st = a.seed;
            let mut worst = Rational::zero();
            let mut trials = 0;
            for _ in 0..a.trials {
                let x = random_rationals(&mut st, 4);
                let y = random_rationals(&mut st, 4);
                for n in 1..=4 {
                    for k in 1..=4 {
                        let r = dual_cauchy_residual(&x[..n], &y[..k]).abs();
                        if r > worst {
                            worst = r;
                        }
                        trials += 1;
                    }
                }
            }
            json!({ "suite": "cauchy", "trials": trials, "max_residual": to_f64(&worst), "exact_zero": worst.is_zero() })
        }
        Suite::Oracle => {
            let mut st = a.seed;
            let mut worst: f64 = 0.0;
            for t in 0..a.trials {
                let (n, k) = (1 + t % 3, 1 + (t / 3) % 3);
                let xr = random_rationals(&mut st, n);
                let yr = random_rationals(&mut st, k);
                let table = measure_table(&xr, &yr)?;
                let x: Vec<f64> = xr.iter().map(to_f64).collect();
                let y: Vec<f64> = yr.iter().map(to_f64).collect();
                let fk = std::cell::RefCell::new(FiniteKernel::new(&x, &y, 1e-12)?);
                worst = worst.max(determinantal_check(&table, |p, q| Ok(fk.borrow_mut().value(p, q)?.value))?);
            }
            json!({ "suite": "oracle", "trials": a.trials, "max_residual": worst })
        }
        Suite::Identities => {
            let df = verify_df_identities(50);
            let mut worst: f64 = 0.0;
            for d in 1..=12 {
                let r = kernel_equivalence_residual(d);
                worst = worst.max(r.entries).max(r.determinant);
            }
            let mut tw: f64 = 0.0;
            for i in 0..=12 {
                let s = -4.0 + 0.5 * i as f64;
                let p = tracy_widom_cdf_with(s, TwRule::Truncated)?;
                let q = tracy_widom_cdf_with(s, TwRule::Tangent)?;
                tw = tw.max((p - q).abs());
            }
            json!({
                "suite": "identities",
                "trials": 12 + 13,
                "double_factorial_identities": df,
                "max_residual": worst.max(tw),
                "kernel_equivalence_residual": worst,
                "tracy_widom_route_difference": tw,
            })
        }
        Suite::Montecarlo => {
            let path = a.config.as_ref().expect("clap requires --config for montecarlo");
            let cfg: ExperimentConfig =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let rep = run_experiment(&cfg)?;
            if let Some(h) = &a.hist_out {
                let mut csv = String::from("x,empirical,target\n");
                for r in &rep.histogram {
                    writeln!(csv, "{},{},{}", r.x, r.empirical, r.target).unwrap();
                }
                write(h, csv.as_bytes())?;
            }
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v.as_object_mut().unwrap().remove("histogram");
            v
        }
    };
    emit(None, &format!("{out}\n"))
}

//! Monte Carlo checks of the asymptotic statements: sup-norm distance to the
//! limit shape, edge statistics against Tracy–Widom, corner statistics
//! against the discrete Hermite law and the slope of constant-q diagrams.
//!
//! Every report carries the raw distance next to its threshold and is a pure
//! function of the configuration (samples use `derive_seed(seed, i)`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuations::{hermite_pmf, standardize_edge, tracy_widom_cdf, CornerScaling};
use crate::partitions::{boundary_profile, Partition};
use crate::saddle::{constant_q_line, corner_residual_right, EdgeClass, End, QRegime, Saddle};
use crate::sampler::XySampler;
use crate::specialization::{SpecFamily, SpecPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Supnorm,
    FirstRow,
    FirstColumn,
    CornerPmf,
    Slope,
}

/// How the column count is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum KRule {
    Fixed { k: usize },
    /// The `k` whose finite-size corner parameter is closest to `s`.
    Corner { s: f64 },
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_delta_max() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: SpecPair,
    pub n: usize,
    pub k: KRule,
    pub samples: usize,
    pub seed: u64,
    pub statistic: Statistic,
    pub threshold: f64,
    /// Sup-norm tolerance for [`Statistic::Supnorm`].
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Number of corner offsets compared for [`Statistic::CornerPmf`].
    #[serde(default = "default_delta_max")]
    pub delta_max: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.n == 0 {
            return Err(Error::InvalidArgument("need n ≥ 1 and at least one sample".into()));
        }
        match (self.statistic, self.k) {
            (Statistic::CornerPmf, _) => {}
            (_, KRule::Corner { .. }) => {
                return Err(Error::CalibrationFailure("corner calibration only applies to corner_pmf".into()))
            }
            _ => {}
        }
        if self.k == (KRule::Fixed { k: 0 }) {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        self.spec.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Fraction of samples within `epsilon` in sup norm; passes when at least the threshold.
    FractionWithin,
    /// Kolmogorov–Smirnov distance; passes when at most the threshold.
    Ks,
    TotalVariation,
    /// Absolute slope error, or mean filling for degenerate regimes.
    AbsError,
}

impl Metric {
    pub fn passes(self, value: f64, threshold: f64) -> bool {
        match self {
            Metric::FractionWithin => value >= threshold,
            _ => value <= threshold,
        }
    }
}

/// One row of a plot-ready histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub x: f64,
    pub empirical: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub statistic: Statistic,
    pub metric: Metric,
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
    pub histogram: Vec<HistRow>,
}

impl StatReport {
    fn new(cfg: &ExperimentConfig, k: usize, metric: Metric, value: f64) -> Self {
        StatReport {
            statistic: cfg.statistic,
            metric,
            n: cfg.n,
            k,
            samples: cfg.samples,
            seed: cfg.seed,
            value,
            threshold: cfg.threshold,
            pass: metric.passes(value, cfg.threshold),
            details: BTreeMap::new(),
            histogram: Vec::new(),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    cfg.validate()?;
    match cfg.statistic {
        Statistic::Supnorm => supnorm_experiment(cfg),
        Statistic::FirstRow | Statistic::FirstColumn => edge_experiment(cfg),
        Statistic::CornerPmf => corner_experiment(cfg),
        Statistic::Slope => constant_q_experiment(cfg),
    }
}

fn fixed_k(cfg: &ExperimentConfig) -> Result<usize> {
    match cfg.k {
        KRule::Fixed { k } => Ok(k),
        KRule::Corner { .. } => Err(Error::CalibrationFailure("this statistic needs a fixed k".into())),
    }
}

fn draw(spec: &SpecPair, n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Partition>> {
    Ok(XySampler::from_spec(spec, n, k)?.batch(count, seed).into_iter().map(|(_, p)| p).collect())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Sup distance between the rescaled boundary and `omega`, tabulated at the
/// lattice points and midpoints `u = j/(2n)`.
fn sup_distance(p: &Partition, n: usize, k: usize, omega: &[f64]) -> Result<f64> {
    let prof = boundary_profile(p, n, k)?;
    let mut worst: f64 = 0.0;
    for (i, &v) in prof.values.iter().enumerate() {
        worst = worst.max((v - omega[2 * i]).abs());
        if let Some(&w) = prof.values.get(i + 1) {
            worst = worst.max((0.5 * (v + w) - omega[2 * i + 1]).abs());
        }
    }
    Ok(worst)
}

pub fn supnorm_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    let k = fixed_k(cfg)?;
    let n = cfg.n;
    let table = Saddle::new(&cfg.spec)?.shape_table()?;
    let omega: Vec<f64> = (0..=2 * (n + k))
        .map(|j| table.omega((j as f64 - 2.0 * n as f64) / (2.0 * n as f64)))
        .collect::<Result<_>>()?;
    let samples = draw(&cfg.spec, n, k, cfg.samples, cfg.seed)?;
    let mut dist: Vec<f64> = samples.iter().map(|p| sup_distance(p, n, k, &omega)).collect::<Result<_>>()?;
    let within = dist.iter().filter(|&&d| d < cfg.epsilon).count() as f64 / dist.len() as f64;
    let mut rep = StatReport::new(cfg, k, Metric::FractionWithin, within);
    rep.details.insert("epsilon".into(), cfg.epsilon);
    rep.details.insert("max_distance".into(), dist.iter().cloned().fold(0.0, f64::max));
    rep.details.insert("median_distance".into(), median(&mut dist));
    Ok(rep)
}

/// KS distances of a lattice-valued sample (spacing `step`) to `cdf`.
#[derive(Debug, Clone, PartialEq)]
struct LatticeKs {
    /// `sup_s |F̂(s) − F(s)|` over all real `s`.
    raw: f64,
    /// The same supremum restricted to lattice points `s`, where the
    /// discrete law can be compared with `F` directly.
    lattice: f64,
    /// Each atom against the target mass of its cell `(v − h/2, v + h/2]`.
    cell: f64,
    hist: Vec<HistRow>,
}

fn lattice_ks(values: &[f64], step: f64, cdf: impl Fn(f64) -> Result<f64>) -> Result<LatticeKs> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    // distinct atoms with cumulative counts
    let mut atoms: Vec<(f64, usize)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        match atoms.last_mut() {
            Some(a) if (x - a.0).abs() < 1e-6 * step => a.1 = i + 1,
            _ => atoms.push((x, i + 1)),
        }
    }
    let (mut raw, mut lattice, mut cell) = (0.0f64, 0.0f64, 0.0f64);
    let mut hist = Vec::with_capacity(atoms.len());
    let mut below = 0.0;
    // the empty lattice point just below the smallest atom
    lattice = lattice.max(cdf(atoms[0].0 - step)?);
    for (j, &(x, cum)) in atoms.iter().enumerate() {
        let after = cum as f64 / m;
        let f = cdf(x)?;
        raw = raw.max((after - f).abs()).max((below - f).abs());
        lattice = lattice.max((after - f).abs());
        // empty lattice points up to the next atom keep the value `after`
        let next = atoms.get(j + 1).map_or(x + step, |a| a.0 - step);
        if next > x + 0.5 * step {
            lattice = lattice.max((after - cdf(x + step)?).abs()).max((after - cdf(next)?).abs());
        }
        let (lo, hi) = (cdf(x - 0.5 * step)?, cdf(x + 0.5 * step)?);
        cell = cell.max((after - hi).abs()).max((below - lo).abs());
        hist.push(HistRow { x, empirical: after - below, target: hi - lo });
        below = after;
    }
    Ok(LatticeKs { raw, lattice, cell, hist })
}

/// Standardized extreme row (right edge) or column (left edge) against
/// `F_GUE`. The reported value is the KS distance over lattice points; the
/// distance over all reals and the cell-corrected one are kept in `details`.
pub fn edge_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    let k = fixed_k(cfg)?;
    let n = cfg.n;
    let sad = Saddle::new(&cfg.spec)?;
    let ivs = sad.intervals();
    let (idx, side) = match cfg.statistic {
        Statistic::FirstColumn => (0, End::Left),
        _ => (ivs.len() - 1, End::Right),
    };
    let iv = &ivs[idx];
    let (class, frozen, t_edge) = match side {
        End::Right => (iv.right_class, iv.right_frozen, iv.t_plus),
        End::Left => (iv.left_class, iv.left_frozen, iv.t_minus),
    };
    let frozen = match (class, frozen) {
        (EdgeClass::Airy, Some(f)) => f,
        _ => return Err(Error::DegenerateEdge(format!("{side:?} end at t = {t_edge} is {class:?}"))),
    };
    let sigma = sad.airy_sigma(idx, side)?.sigma;
    let samples = draw(&cfg.spec, n, k, cfg.samples, cfg.seed)?;
    let z = standardize_edge(&samples, n, k, t_edge, sigma, side, frozen)?;
    let step = sigma / (n as f64).cbrt();
    let ks = lattice_ks(&z, step, tracy_widom_cdf)?;
    let mut rep = StatReport::new(cfg, k, Metric::Ks, ks.lattice);
    rep.details.insert("ks_raw".into(), ks.raw);
    rep.details.insert("ks_cell".into(), ks.cell);
    rep.details.insert("sigma".into(), sigma);
    rep.details.insert("t_edge".into(), t_edge);
    rep.details.insert("lattice_step".into(), step);
    rep.details.insert("mean".into(), z.iter().sum::<f64>() / z.len() as f64);
    rep.details.insert("frozen_full".into(), (frozen == crate::saddle::Frozen::Full) as u8 as f64);
    rep.histogram = ks.hist;
    Ok(rep)
}

fn mean_square(h: &SpecFamily, phi: impl Fn(f64) -> f64) -> Result<f64> {
    let m = 1 << 16;
    Ok(h.grid(m)?.iter().map(|&v| phi(v)).sum::<f64>() / m as f64)
}

/// Finite-size corner parameter of the grids: `(Σ1/y − Σx)/√(Σx² + Σy⁻²)`.
pub fn corner_parameter(x: &[f64], y: &[f64]) -> f64 {
    crate::fluctuations::effective_corner_s(x, y)
}

/// Corner calibration: returns `(k, s_eff, k_formula)` where `k_formula` is
/// `round(cn + (s̃/τ)√n)` and `k` minimizes `|s_eff − s|` nearby.
pub fn calibrate_corner_k(spec: &SpecPair, n: usize, s: f64) -> Result<(usize, f64, usize)> {
    let resid = corner_residual_right(spec)?;
    if resid.abs() > 1e-6 {
        return Err(Error::CalibrationFailure(format!("∫f − c∫1/g = {resid:e} is not zero")));
    }
    let inv_g = mean_square(&spec.g, |v| 1.0 / v)?;
    let sc = CornerScaling::new(mean_square(&spec.f, |v| v * v)?, mean_square(&spec.g, |v| 1.0 / (v * v))?, inv_g, spec.c);
    let k_formula = sc.k_real(n, spec.c, sc.tilde_from_s(s)).round().max(1.0) as usize;
    let x = spec.f.grid(n)?;
    let span = (4.0 * (n as f64).sqrt()).ceil() as usize + 4;
    let mut best: Option<(usize, f64)> = None;
    for k in k_formula.saturating_sub(span).max(1)..=k_formula + span {
        let se = corner_parameter(&x, &spec.g.grid(k)?);
        if best.is_none_or(|(_, b)| (se - s).abs() < (b - s).abs()) {
            best = Some((k, se));
        }
    }
    let (k, se) = best.expect("nonempty search window");
    if (se - s).abs() > 0.05 {
        return Err(Error::CalibrationFailure(format!("closest corner parameter {se} misses {s}")));
    }
    Ok((k, se, k_formula))
}

/// Law of `k − λ₁` against the discrete Hermite pmf at the configured `s`.
pub fn corner_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    let n = cfg.n;
    let (k, s_eff, k_formula, s) = match cfg.k {
        KRule::Corner { s } => {
            let (k, se, kf) = calibrate_corner_k(&cfg.spec, n, s)?;
            (k, se, kf, s)
        }
        KRule::Fixed { k } => {
            let se = corner_parameter(&cfg.spec.f.grid(n)?, &cfg.spec.g.grid(k)?);
            (k, se, k, se)
        }
    };
    let sampler = XySampler::new(&cfg.spec.f.grid(n)?, &cfg.spec.g.grid(k)?);
    let samples = sampler.batch(cfg.samples, cfg.seed);
    let dm = cfg.delta_max;
    let mut counts = vec![0usize; dm + 2];
    for (_, p) in &samples {
        let d = k - p.part(0);
        counts[d.min(dm + 1)] += 1;
    }
    let target = hermite_pmf(s, dm);
    let total = samples.len() as f64;
    let mut tv = 0.0;
    let mut hist = Vec::new();
    for d in 0..=dm {
        let e = counts[d] as f64 / total;
        tv += (e - target[d]).abs();
        hist.push(HistRow { x: d as f64, empirical: e, target: target[d] });
    }
    let tail_target = 1.0 - target.iter().sum::<f64>();
    tv += (counts[dm + 1] as f64 / total - tail_target).abs();
    let mut rep = StatReport::new(cfg, k, Metric::TotalVariation, 0.5 * tv);
    rep.details.insert("s".into(), s);
    rep.details.insert("s_eff".into(), s_eff);
    rep.details.insert("k_formula".into(), k_formula as f64);
    rep.details.insert("p_corner".into(), counts[0] as f64 / total);
    rep.histogram = hist;
    Ok(rep)
}

/// Least-squares slope of the mean rescaled boundary over the conjectured
/// support, or the mean filling `|λ|/(nk)` when the diagram degenerates.
pub fn constant_q_experiment(cfg: &ExperimentConfig) -> Result<StatReport> {
    let k = fixed_k(cfg)?;
    let n = cfg.n;
    let (q, b) = match (&cfg.spec.f, &cfg.spec.g) {
        (SpecFamily::ConstantQ { q, b: bf }, SpecFamily::ConstantQ { q: qg, b }) if (bf - 1.0).abs() < 1e-12 && q == qg => (*q, *b),
        _ => return Err(Error::InvalidFamily("slope experiments need x_i = q^(i−1), y_j = q^(b(j−1))".into())),
    };
    let c = k as f64 / n as f64;
    let line = constant_q_line(q, b, c)?;
    let samples = draw(&cfg.spec, n, k, cfg.samples, cfg.seed)?;
    let fill = samples.iter().map(|p| p.size() as f64).sum::<f64>() / (samples.len() * n * k) as f64;
    let mut rep = match line.regime {
        QRegime::Empty | QRegime::Full => {
            let err = if line.regime == QRegime::Empty { fill } else { 1.0 - fill };
            StatReport::new(cfg, k, Metric::AbsError, err)
        }
        QRegime::Line => {
            let mut mean = vec![0.0; n + k + 1];
            for p in &samples {
                let prof = boundary_profile(p, n, k)?;
                for (m, v) in mean.iter_mut().zip(&prof.values) {
                    *m += v / samples.len() as f64;
                }
            }
            let (lo, hi) = line.support;
            let pts: Vec<(f64, f64)> = (0..=n + k)
                .map(|i| ((i as f64 - n as f64) / n as f64, mean[i]))
                .filter(|&(u, _)| u >= lo && u <= hi)
                .collect();
            let m = pts.len() as f64;
            let (su, sv) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let (mu, mv) = (su / m, sv / m);
            let (cov, var) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mu) * (p.1 - mv), a.1 + (p.0 - mu) * (p.0 - mu)));
            let slope = cov / var;
            let want = line.slope.expect("line regime has a slope");
            let mut rep = StatReport::new(cfg, k, Metric::AbsError, (slope - want).abs());
            rep.details.insert("slope".into(), slope);
            rep.details.insert("conjectured_slope".into(), want);
            rep.details.insert("intercept".into(), mv - slope * mu);
            rep
        }
    };
    rep.details.insert("fill".into(), fill);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(spec: SpecPair, n: usize, k: KRule, samples: usize, statistic: Statistic, threshold: f64) -> ExperimentConfig {
        ExperimentConfig { spec, n, k, samples, seed: 11, statistic, threshold, epsilon: 0.05, delta_max: 12 }
    }

    #[test]
    fn lattice_ks_on_exact_cells() {
        // atoms carrying exactly their cell mass give a zero corrected distance
        let cdf = |x: f64| Ok((x / 4.0).clamp(0.0, 1.0));
        let vals = [0.5, 1.5, 2.5, 3.5];
        let ks = lattice_ks(&vals, 1.0, cdf).unwrap();
        assert!(ks.cell < 1e-12);
        assert!((ks.raw - 0.125).abs() < 1e-12);
        assert!((ks.lattice - 0.125).abs() < 1e-12);
        assert_eq!(ks.hist.len(), 4);
        // a sample sitting exactly on F at its atoms has zero lattice distance
        let vals = [1.0, 2.0, 3.0, 4.0];
        let ks = lattice_ks(&vals, 1.0, cdf).unwrap();
        assert!(ks.lattice < 1e-12 && ks.raw > 0.24);
    }

    #[test]
    fn reports_reproduce() {
        let c = cfg(SpecPair::constant(1.0, 1.0), 30, KRule::Fixed { k: 30 }, 40, Statistic::CornerPmf, 1.0);
        let a = run_experiment(&c).unwrap();
        assert_eq!(a, run_experiment(&c).unwrap());
        assert_eq!(a.details["s_eff"], 0.0);
    }

    #[test]
    fn small_supnorm_runs() {
        let c = cfg(SpecPair::constant(1.0, 2.0), 60, KRule::Fixed { k: 120 }, 10, Statistic::Supnorm, 0.5);
        let r = run_experiment(&c).unwrap();
        assert!(r.details["median_distance"] < 0.2);
    }

    #[test]
    fn corner_calibration_hits_target() {
        let spec = SpecPair::new(
            SpecFamily::Monomial { alpha: 4.0, exponent: 3.0 },
            SpecFamily::Sine { base: 2.0, amplitude: 1.0, frequency: 1 },
            3f64.sqrt(),
        )
        .unwrap();
        let (k, se, kf) = calibrate_corner_k(&spec, 200, 0.0).unwrap();
        assert!(se.abs() < 0.02, "{k} {se} {kf}");
        // the right-endpoint grid of 4s³ overshoots ∫f by about 2/n, which moves k by a few columns
        assert!((k as i64 - kf as i64).abs() <= 8, "{k} {se} {kf}");
        let off = SpecPair::constant(1.0, 2.0);
        assert!(matches!(calibrate_corner_k(&off, 50, 0.0), Err(Error::CalibrationFailure(_))));
    }

    #[test]
    fn bad_configs_rejected() {
        let c = cfg(SpecPair::constant(1.0, 2.0), 10, KRule::Corner { s: 0.0 }, 5, Statistic::Supnorm, 0.5);
        assert!(matches!(run_experiment(&c), Err(Error::CalibrationFailure(_))));
        let c = cfg(SpecPair::constant(1.0, 2.0), 10, KRule::Fixed { k: 10 }, 0, Statistic::Supnorm, 0.5);
        assert!(run_experiment(&c).is_err());
        let c = cfg(SpecPair::constant(1.0, 1.0), 10, KRule::Fixed { k: 10 }, 5, Statistic::FirstRow, 0.5);
        assert!(matches!(run_experiment(&c), Err(Error::DegenerateEdge(_))));
    }
}

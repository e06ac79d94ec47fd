//! Limit shapes from the saddle-point equation `I1(z) = t`.
//!
//! Support endpoints are the images under `I1` of the real roots of `I2`;
//! inside the support the equation has one root in the upper half plane and
//! the density is its argument divided by π.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::specialization::{SpecFamily, SpecPair};

const PROBES: usize = 512;
const V_SPAN: f64 = 30.0;
/// Residual below which a corner condition is considered satisfied.
pub const CORNER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    Finite(f64),
    Infinity,
}

impl Root {
    pub fn value(&self) -> f64 {
        match *self {
            Root::Finite(x) => x,
            Root::Infinity => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frozen {
    Empty,
    Full,
}

impl Frozen {
    pub fn rho(&self) -> f64 {
        match self {
            Frozen::Empty => 0.0,
            Frozen::Full => 1.0,
        }
    }

    fn from_root(z: f64) -> Option<Frozen> {
        if z > 0.0 {
            Some(Frozen::Empty)
        } else if z < 0.0 {
            Some(Frozen::Full)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Airy,
    Corner,
    PearceyShared,
    Degenerate,
}

/// `z_minus` is the real root attached to `t_minus` (`I1(z_minus) = t_minus`),
/// likewise for `z_plus`. A frozen label is `None` when the neighbour is
/// another support interval or the end sits in a box corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    pub t_minus: f64,
    pub t_plus: f64,
    pub z_minus: Root,
    pub z_plus: Root,
    pub left_frozen: Option<Frozen>,
    pub right_frozen: Option<Frozen>,
    pub left_class: EdgeClass,
    pub right_class: EdgeClass,
    #[serde(skip)]
    mid_root: Complex64,
}

impl SupportInterval {
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_minus && t < self.t_plus
    }

    fn mid(&self) -> f64 {
        0.5 * (self.t_minus + self.t_plus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub t: f64,
    pub rho: f64,
    /// Upper-half-plane root; `None` in frozen regions.
    pub z1: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
    /// `(re, im)` of the root, absent where frozen.
    pub z1: Vec<Option<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy)]
struct RealRoot {
    z: f64,
    t: f64,
    double: bool,
}

/// A spec with its support resolved; all further queries reuse it.
#[derive(Debug, Clone)]
pub struct Saddle {
    spec: SpecPair,
    intervals: Vec<SupportInterval>,
    roots: Vec<RealRoot>,
}

fn i1(s: &SpecPair, z: Complex64) -> Result<Complex64> {
    s.transform_i1(z)
}

/// Damped Newton for `I1(z) = t` in the variable `w = ln z`, kept in the
/// upper half plane by conjugation.
fn newton_upper(s: &SpecPair, t: f64, z0: Complex64) -> Option<Complex64> {
    if z0.im <= 0.0 {
        return None;
    }
    let mut w = z0.ln();
    let tol = 1e-13 * (1.0 + t.abs());
    for _ in 0..80 {
        let z = w.exp();
        let f = i1(s, z).ok()? - t;
        if f.norm() < tol {
            return (w.im > 1e-8 && w.im < PI - 1e-8).then_some(z);
        }
        let d = s.transform_i2(z).ok()?;
        if d.norm() == 0.0 {
            return None;
        }
        let mut step = f / d;
        let m = step.norm();
        if m > 1.0 {
            step /= m;
        }
        w -= step;
        let mut a = w.im.rem_euclid(2.0 * PI);
        if a > PI {
            a = 2.0 * PI - a;
        }
        if a < 1e-14 || a > PI - 1e-14 || !w.re.is_finite() {
            return None;
        }
        w.im = a;
    }
    None
}

fn seed_scale(s: &SpecPair) -> Result<f64> {
    let mut acc = 0.0;
    let mut m = 0;
    for (a, b) in s.cut_segments()? {
        for x in [a, b] {
            if x.is_finite() && x != 0.0 {
                acc += x.abs().ln();
                m += 1;
            }
        }
    }
    Ok(if m == 0 { 1.0 } else { (acc / m as f64).exp() })
}

fn seeds(scale: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    for k in 0..13i32 {
        // 0, +1, −1, +2, −2, ... in half-decades
        let e = if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) };
        let r = scale * 10f64.powf(e as f64 / 2.0);
        for j in [4, 2, 6, 1, 7, 3, 5] {
            out.push(Complex64::from_polar(r, j as f64 * PI / 8.0));
        }
    }
    out
}

/// Every distinct upper root reachable from the seed set.
fn upper_roots(s: &SpecPair, t: f64) -> Result<Vec<Complex64>> {
    let mut found: Vec<Complex64> = Vec::new();
    for z0 in seeds(seed_scale(s)?) {
        if let Some(z) = newton_upper(s, t, z0) {
            if !found.iter().any(|r| (r - z).norm() <= 1e-6 * r.norm().max(1e-300)) {
                found.push(z);
            }
        }
    }
    Ok(found)
}

fn probe(a: f64, b: f64, v: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => a + (b - a) / (1.0 + (-v).exp()),
        (false, true) => b - (b.abs() + 1.0) * v.exp(),
        (true, false) => a + (a.abs() + 1.0) * v.exp(),
        _ => v.sinh(),
    }
}

/// Open real windows where the transforms are analytic: the complement of
/// the branch segments and of the origin.
fn windows(s: &SpecPair) -> Result<Vec<(f64, f64)>> {
    let mut bad = s.cut_segments()?;
    bad.push((0.0, 0.0));
    bad.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in bad {
        match merged.last_mut() {
            Some(l) if a <= l.1 => l.1 = l.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let mut out = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for (a, b) in merged {
        if a > lo {
            out.push((lo, a));
        }
        lo = b;
    }
    if lo < f64::INFINITY {
        out.push((lo, f64::INFINITY));
    }
    Ok(out)
}

fn bisect<F: Fn(f64) -> Option<f64>>(f: &F, a: f64, b: f64, x: &dyn Fn(f64) -> f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        let xm = x(m);
        if (x(hi) - x(lo)).abs() <= 1e-13 * xm.abs().max(1e-300) {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(xm);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    Some(x(0.5 * (lo + hi)))
}

fn real_roots(s: &SpecPair) -> Result<Vec<RealRoot>> {
    let mut simple = Vec::new();
    let mut double = Vec::new();
    for (a, b) in windows(s)? {
        let x = |v: f64| probe(a, b, v);
        let i2 = |v: f64| s.transform_real(2, x(v)).ok();
        let i3 = |v: f64| s.transform_real(3, x(v)).ok();
        let vs: Vec<f64> = (0..PROBES).map(|i| -V_SPAN + 2.0 * V_SPAN * i as f64 / (PROBES - 1) as f64).collect();
        let vals: Vec<Option<(f64, f64)>> = vs.iter().map(|&v| i2(v).zip(i3(v))).collect();
        let mut prev: Option<(f64, (f64, f64))> = None;
        for (&v, val) in vs.iter().zip(&vals) {
            let Some(cur) = *val else { continue };
            if let Some((pv, p)) = prev {
                if (p.0 > 0.0) != (cur.0 > 0.0) || cur.0 == 0.0 {
                    if let Some(z) = bisect(&i2, pv, v, &x) {
                        simple.push(z);
                    }
                }
                if (p.1 > 0.0) != (cur.1 > 0.0) {
                    if let Some(z) = bisect(&i3, pv, v, &x) {
                        let r2 = s.transform_real(2, z)?;
                        if r2.abs() < 1e-8 {
                            double.push(z);
                        }
                    }
                }
            }
            prev = Some((v, cur));
        }
    }
    let near = |u: f64, w: f64| (u - w).abs() <= 1e-6 * u.abs().max(1.0);
    let mut out: Vec<RealRoot> = Vec::new();
    for z in double.iter().copied() {
        out.push(RealRoot { z, t: s.transform_real(1, z)?, double: true });
    }
    for z in simple {
        if z != 0.0 && !double.iter().any(|&d| near(d, z)) && !out.iter().any(|r| near(r.z, z)) {
            out.push(RealRoot { z, t: s.transform_real(1, z)?, double: false });
        }
    }
    out.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    Ok(out)
}

/// Right corner residual `∫f − c∫1/g`.
pub fn corner_residual_right(s: &SpecPair) -> Result<f64> {
    let a = integral_of(&s.f, |h| h)?;
    let b = reciprocal_integral(&s.g)?;
    Ok(a - s.c * b)
}

/// Left corner residual `∫1/f − c∫g`.
pub fn corner_residual_left(s: &SpecPair) -> Result<f64> {
    let a = reciprocal_integral(&s.f)?;
    let b = integral_of(&s.g, |h| h)?;
    Ok(a - s.c * b)
}

/// Both corner residuals, `(right, left)`.
pub fn corner_residuals(s: &SpecPair) -> Result<(f64, f64)> {
    Ok((corner_residual_right(s)?, corner_residual_left(s)?))
}

fn integral_of(h: &SpecFamily, phi: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(h.integrate(|v| Complex64::new(phi(v), 0.0), None)?.re)
}

fn reciprocal_integral(h: &SpecFamily) -> Result<f64> {
    if let SpecFamily::Monomial { exponent, .. } = h {
        if *exponent >= 1.0 {
            return Err(Error::DivergentIntegral(format!("1/s^{exponent} is not integrable at 0")));
        }
    }
    integral_of(h, |v| 1.0 / v).map_err(|_| Error::DivergentIntegral("reciprocal integral did not converge".into()))
}

impl Saddle {
    /// Locates the real roots of `I2`, maps them to endpoints and keeps the
    /// gaps whose midpoint has an upper-half-plane solution.
    pub fn new(spec: &SpecPair) -> Result<Saddle> {
        spec.validate()?;
        if !spec.has_transforms() {
            return Err(Error::InvalidFamily("constant_q families have no continuum transforms".into()));
        }
        let c = spec.c;
        let roots = real_roots(spec)?;
        let mut ends = vec![-1.0, c];
        for r in &roots {
            if r.t > -1.0 + 1e-12 && r.t < c - 1e-12 {
                ends.push(r.t);
            }
        }
        ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ends.dedup_by(|a, b| (*a - *b).abs() < 1e-11);

        let mut gaps: Vec<(f64, f64, f64, Complex64)> = Vec::new();
        for w in ends.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-11 {
                continue;
            }
            let found = upper_roots(spec, 0.5 * (a + b))?;
            match found.len() {
                0 => {}
                1 => gaps.push((a, b, 0.5 * (a + b), found[0])),
                _ => return Err(Error::AmbiguousRoots(0.5 * (a + b))),
            }
        }
        if gaps.is_empty() {
            return Err(Error::NoSupport);
        }

        let double_at = |t: f64| roots.iter().any(|r| r.double && (r.t - t).abs() < 1e-9);
        let mut merged: Vec<(f64, f64, f64, Complex64)> = Vec::new();
        for g in gaps {
            match merged.last_mut() {
                Some(l) if (l.1 - g.0).abs() < 1e-12 && !double_at(g.0) => l.1 = g.1,
                _ => merged.push(g),
            }
        }

        let right = corner_residual_right(spec).ok();
        let left = corner_residual_left(spec).ok();
        let mut intervals = Vec::new();
        for (k, &(a, b, t0, z)) in merged.iter().enumerate() {
            let (z_minus, left_class, left_frozen) =
                end_info(&roots, a, -1.0, left, k > 0 && (merged[k - 1].1 - a).abs() < 1e-12, spec, Root::Infinity)?;
            let shared_right = k + 1 < merged.len() && (merged[k + 1].0 - b).abs() < 1e-12;
            let (z_plus, right_class, right_frozen) = end_info(&roots, b, c, right, shared_right, spec, Root::Finite(0.0))?;
            let mut iv = SupportInterval {
                t_minus: a,
                t_plus: b,
                z_minus,
                z_plus,
                left_frozen,
                right_frozen,
                left_class,
                right_class,
                mid_root: z,
            };
            iv.mid_root = continue_root(spec, t0, z, iv.mid(), &iv)?;
            intervals.push(iv);
        }
        Ok(Saddle { spec: spec.clone(), intervals, roots })
    }

    pub fn spec(&self) -> &SpecPair {
        &self.spec
    }

    pub fn intervals(&self) -> &[SupportInterval] {
        &self.intervals
    }

    /// Density outside every interval: the label of the nearest frozen side.
    fn frozen_at(&self, t: f64) -> f64 {
        let mut best: Option<(f64, f64)> = None;
        for iv in &self.intervals {
            for (edge, lab) in [(iv.t_minus, iv.left_frozen), (iv.t_plus, iv.right_frozen)] {
                let on_side = if edge == iv.t_minus { t <= edge } else { t >= edge };
                if let (true, Some(l)) = (on_side, lab) {
                    let d = (t - edge).abs();
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, l.rho()));
                    }
                }
            }
        }
        best.map(|b| b.1).unwrap_or(0.0)
    }

    fn interval_of(&self, t: f64) -> Option<&SupportInterval> {
        self.intervals.iter().find(|iv| iv.contains(t))
    }

    pub fn density(&self, t: f64) -> Result<DensityPoint> {
        match self.interval_of(t) {
            None => Ok(DensityPoint { t, rho: self.frozen_at(t), z1: None }),
            Some(iv) => {
                let z = continue_root(&self.spec, iv.mid(), iv.mid_root, t, iv)?;
                Ok(DensityPoint { t, rho: z.arg() / PI, z1: Some(z) })
            }
        }
    }

    /// Density along a grid with continuation between neighbouring points.
    pub fn curve(&self, grid: &[f64]) -> Result<DensityCurve> {
        let mut out = DensityCurve { t: Vec::new(), rho: Vec::new(), z1: Vec::new() };
        let mut last: Option<(usize, f64, Complex64)> = None;
        for &t in grid {
            let p = match self.intervals.iter().position(|iv| iv.contains(t)) {
                None => DensityPoint { t, rho: self.frozen_at(t), z1: None },
                Some(k) => {
                    let iv = &self.intervals[k];
                    let (t0, z0) = match last {
                        Some((j, t0, z0)) if j == k => (t0, z0),
                        _ => (iv.mid(), iv.mid_root),
                    };
                    let z = continue_root(&self.spec, t0, z0, t, iv)?;
                    last = Some((k, t, z));
                    DensityPoint { t, rho: z.arg() / PI, z1: Some(z) }
                }
            };
            out.t.push(t);
            out.rho.push(p.rho);
            out.z1.push(p.z1.map(|z| (z.re, z.im)));
        }
        Ok(out)
    }

    /// Cumulative mass tables for the limit shape.
    pub fn shape_table(&self) -> Result<ShapeTable> {
        let (x, w) = gauss_legendre(GL_ORDER);
        let mut tables = Vec::new();
        for iv in &self.intervals {
            let map = VMap { a: iv.t_minus, b: iv.t_plus };
            let mut cum = vec![0.0; CELLS + 1];
            let mut seeds = vec![iv.mid_root; CELLS];
            let mut cell_mass = vec![0.0; CELLS];
            // march outward from the middle cell so every solve is warm-started
            let order: Vec<usize> = (0..CELLS / 2).rev().chain(CELLS / 2..CELLS).collect();
            let mut seed = (iv.mid(), iv.mid_root);
            for (pos, &j) in order.iter().enumerate() {
                if pos == CELLS / 2 {
                    seed = (iv.mid(), iv.mid_root);
                }
                let (v0, v1) = (j as f64 / CELLS as f64, (j + 1) as f64 / CELLS as f64);
                let mut nodes: Vec<usize> = (0..GL_ORDER).collect();
                if j < CELLS / 2 {
                    nodes.reverse();
                }
                let mut acc = 0.0;
                for i in nodes {
                    let v = 0.5 * (v0 + v1) + 0.5 * (v1 - v0) * x[i];
                    let t = map.t(v);
                    let z = continue_root(&self.spec, seed.0, seed.1, t, iv)?;
                    seed = (t, z);
                    acc += 0.5 * (v1 - v0) * w[i] * (z.arg() / PI) * map.dt(v);
                }
                seeds[j] = seed.1;
                cell_mass[j] = acc;
            }
            for j in 0..CELLS {
                cum[j + 1] = cum[j] + cell_mass[j];
            }
            tables.push(IntervalTable { map, cum, seeds });
        }
        Ok(ShapeTable { saddle: self.clone(), tables })
    }

    pub fn limit_shape(&self, u_grid: &[f64]) -> Result<Vec<f64>> {
        let tab = self.shape_table()?;
        u_grid.iter().map(|&u| tab.omega(u)).collect()
    }

    /// `∫ρ` over `[−1, c]`; equals 1 for a consistent support.
    pub fn mass(&self) -> Result<f64> {
        self.shape_table()?.mass_below(self.spec.c)
    }

    /// Airy scale at one end: `σ = (2/S‴(z))^{1/3}/z`, using `I3 = z³S‴` at a
    /// double critical point. Reported as a positive number.
    pub fn airy_sigma(&self, interval: usize, end: End) -> Result<AirySigma> {
        let iv = self
            .intervals
            .get(interval)
            .ok_or_else(|| Error::InvalidArgument(format!("no interval {interval}")))?;
        let (root, class, t) = match end {
            End::Left => (iv.z_minus, iv.left_class, iv.t_minus),
            End::Right => (iv.z_plus, iv.right_class, iv.t_plus),
        };
        let z = match root {
            Root::Finite(z) if z != 0.0 && class != EdgeClass::Corner => z,
            _ => return Err(Error::DegenerateEdge("critical point at 0 or ∞ (corner regime)".into())),
        };
        let i3 = self.spec.transform_real(3, z)?;
        if i3.abs() < 1e-10 {
            return Err(Error::DegenerateEdge(format!("third derivative vanishes at z = {z}")));
        }
        let sigma = (2.0 / i3).cbrt().abs();
        if !sigma.is_finite() {
            return Err(Error::DegenerateEdge("σ is not finite".into()));
        }
        Ok(AirySigma { t, z_crit: z, i3, s3: i3 / (z * z * z), sigma })
    }

    /// Pearcey scale at a point where two intervals touch:
    /// `σ = (6/∂⁴S)^{1/4}/z` with `∂⁴S = I4/z⁴`.
    pub fn pearcey_sigma(&self, t_d: f64) -> Result<PearceyPoint> {
        let tol = 1e-7;
        let shared = self
            .intervals
            .windows(2)
            .any(|w| (w[0].t_plus - t_d).abs() < tol && (w[1].t_minus - t_d).abs() < tol && w[0].right_class == EdgeClass::PearceyShared);
        if !shared {
            return Err(Error::NotPearcey(format!("no two intervals meet at t = {t_d}")));
        }
        let r = self
            .roots
            .iter()
            .filter(|r| r.double)
            .min_by(|a, b| (a.t - t_d).abs().partial_cmp(&(b.t - t_d).abs()).unwrap())
            .ok_or_else(|| Error::NotPearcey("no double root".into()))?;
        let z = r.z;
        let i3 = self.spec.transform_real(3, z)?;
        let i4 = self.spec.transform_real(4, z)?;
        let d4s = i4 / z.powi(4);
        if d4s == 0.0 {
            return Err(Error::NotPearcey("fourth derivative vanishes".into()));
        }
        let sigma_signed = (6.0 / d4s).abs().powf(0.25) / z;
        Ok(PearceyPoint { t_d: r.t, z_crit: z, i3, d4s, sigma: sigma_signed.abs(), sigma_signed })
    }

    /// Edge labels and the four corner conditions at the right end.
    pub fn classify_edges(&self) -> Result<EdgeReport> {
        let c = self.spec.c;
        let last = self.intervals.last().ok_or(Error::NoSupport)?;
        let h = 1e-6 * (last.t_plus - last.t_minus);
        let r1 = self.density(last.t_plus - h)?.rho;
        let r2 = self.density(last.t_plus - 2.0 * h)?.rho;
        let slope = 1.0 - 2.0 * r1;
        let curvature = -2.0 * (r1 - r2);
        let residual = corner_residual_right(&self.spec).ok();
        let diag = CornerDiagnostic {
            t_plus_at_c: (last.t_plus - c).abs() < 1e-7,
            z_plus_zero: matches!(last.z_plus, Root::Finite(z) if z.abs() < 1e-7),
            omega_slope_zero: slope.abs() < 1e-2,
            corner_residual_zero: residual.is_some_and(|r| r.abs() < CORNER_TOL),
            omega_slope: slope,
            right_residual: residual,
            right_shape: if curvature.abs() < 1e-12 {
                Curvature::Flat
            } else if curvature > 0.0 {
                Curvature::Convex
            } else {
                Curvature::Concave
            },
        };
        Ok(EdgeReport { intervals: self.intervals.clone(), right_end: diag })
    }
}

fn end_info(
    roots: &[RealRoot],
    t: f64,
    corner_t: f64,
    residual: Option<f64>,
    shared: bool,
    s: &SpecPair,
    corner_root: Root,
) -> Result<(Root, EdgeClass, Option<Frozen>)> {
    let hit = roots.iter().filter(|r| (r.t - t).abs() < 1e-9).min_by(|a, b| {
        // prefer the double root at a touching point
        (!a.double).cmp(&!b.double)
    });
    if (t - corner_t).abs() < 1e-11 && hit.is_none() {
        let class = if residual.is_some_and(|r| r.abs() < CORNER_TOL) { EdgeClass::Corner } else { EdgeClass::Degenerate };
        return Ok((corner_root, class, None));
    }
    let Some(r) = hit else {
        return Ok((Root::Finite(f64::NAN), EdgeClass::Degenerate, None));
    };
    let class = if r.double {
        if shared {
            EdgeClass::PearceyShared
        } else {
            EdgeClass::Degenerate
        }
    } else if s.transform_real(3, r.z)?.abs() > 1e-10 {
        EdgeClass::Airy
    } else {
        EdgeClass::Degenerate
    };
    let frozen = if shared { None } else { Frozen::from_root(r.z) };
    Ok((Root::Finite(r.z), class, frozen))
}

/// Follows the upper root from `(t0, z0)` to `t`, halving the step on failure.
fn continue_root(s: &SpecPair, t0: f64, z0: Complex64, t: f64, iv: &SupportInterval) -> Result<Complex64> {
    if let Some(z) = newton_upper(s, t, z0) {
        return Ok(z);
    }
    let (mut tc, mut zc) = (t0, z0);
    let mut dt = t - t0;
    let mut guard = 0;
    while tc != t {
        guard += 1;
        if guard > 10_000 || dt.abs() < 1e-15 * (1.0 + t.abs()) {
            break;
        }
        let tn = if (t - tc).abs() <= dt.abs() { t } else { tc + dt };
        match newton_upper(s, tn, zc) {
            Some(z) => {
                tc = tn;
                zc = z;
                dt *= 2.0;
            }
            None => dt *= 0.5,
        }
    }
    if tc == t {
        return Ok(zc);
    }
    // last resort: the global seed set
    let found = upper_roots(s, t)?;
    match found.len() {
        1 => Ok(found[0]),
        0 => Err(Error::RootFindFailure(format!("no upper root at t = {t} in ({}, {})", iv.t_minus, iv.t_plus))),
        _ => Err(Error::AmbiguousRoots(t)),
    }
}

const CELLS: usize = 64;
const GL_ORDER: usize = 8;

/// `t = a + (b − a)(1 − cos πv)/2`, which flattens square-root edges.
#[derive(Debug, Clone, Copy)]
struct VMap {
    a: f64,
    b: f64,
}

impl VMap {
    fn t(&self, v: f64) -> f64 {
        self.a + (self.b - self.a) * 0.5 * (1.0 - (PI * v).cos())
    }
    fn dt(&self, v: f64) -> f64 {
        (self.b - self.a) * 0.5 * PI * (PI * v).sin()
    }
    fn v(&self, t: f64) -> f64 {
        let x = (1.0 - 2.0 * (t - self.a) / (self.b - self.a)).clamp(-1.0, 1.0);
        x.acos() / PI
    }
}

#[derive(Debug, Clone)]
struct IntervalTable {
    map: VMap,
    cum: Vec<f64>,
    seeds: Vec<Complex64>,
}

/// Precomputed `∫ρ` over each support interval, giving `Ω(u)` cheaply.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    saddle: Saddle,
    tables: Vec<IntervalTable>,
}

impl ShapeTable {
    /// `∫_{−1}^{u} ρ(t) dt`.
    pub fn mass_below(&self, u: f64) -> Result<f64> {
        let sad = &self.saddle;
        let u = u.clamp(-1.0, sad.spec.c);
        let mut total = 0.0;
        // frozen stretches between consecutive support pieces
        let mut lo = -1.0;
        for iv in &sad.intervals {
            let hi = iv.t_minus;
            if hi > lo {
                let rho = sad.frozen_at(0.5 * (lo + hi));
                total += rho * (hi.min(u) - lo).max(0.0);
            }
            lo = iv.t_plus;
        }
        let c = sad.spec.c;
        if c > lo {
            total += sad.frozen_at(0.5 * (lo + c)) * (c.min(u) - lo).max(0.0);
        }
        let (x, w) = gauss_legendre(GL_ORDER);
        for (iv, tab) in sad.intervals.iter().zip(&self.tables) {
            if u >= iv.t_plus {
                total += tab.cum[CELLS];
            } else if u > iv.t_minus {
                let vu = tab.map.v(u);
                let j = ((vu * CELLS as f64).floor() as usize).min(CELLS - 1);
                let v0 = j as f64 / CELLS as f64;
                let mut acc = tab.cum[j];
                let mut seed = (tab.map.t(v0 + 0.5 / CELLS as f64), tab.seeds[j]);
                for i in 0..GL_ORDER {
                    let v = 0.5 * (v0 + vu) + 0.5 * (vu - v0) * x[i];
                    let t = tab.map.t(v);
                    let z = continue_root(&sad.spec, seed.0, seed.1, t, iv)?;
                    seed = (t, z);
                    acc += 0.5 * (vu - v0) * w[i] * (z.arg() / PI) * tab.map.dt(v);
                }
                total += acc;
            }
        }
        Ok(total)
    }

    /// `Ω(u) = 1 + ∫_{−1}^{u} (1 − 2ρ)`.
    pub fn omega(&self, u: f64) -> Result<f64> {
        let c = self.saddle.spec.c;
        if u <= -1.0 || u >= c {
            // vacuum outside the box window
            return Ok(if u <= -1.0 { -u } else { u });
        }
        Ok(1.0 + (u + 1.0) - 2.0 * self.mass_below(u)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirySigma {
    pub t: f64,
    pub z_crit: f64,
    /// `(z∂z)³S` at the critical point.
    pub i3: f64,
    /// `∂z³S = I3/z³`.
    pub s3: f64,
    pub sigma: f64,
}

/// `sigma` is a magnitude; `sigma_signed` keeps the sign of `1/z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearceyPoint {
    pub t_d: f64,
    pub z_crit: f64,
    pub i3: f64,
    pub d4s: f64,
    pub sigma: f64,
    pub sigma_signed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    Concave,
    Flat,
}

/// The four right-corner conditions, evaluated independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerDiagnostic {
    pub t_plus_at_c: bool,
    pub z_plus_zero: bool,
    pub omega_slope_zero: bool,
    pub corner_residual_zero: bool,
    pub omega_slope: f64,
    pub right_residual: Option<f64>,
    pub right_shape: Curvature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub intervals: Vec<SupportInterval>,
    pub right_end: CornerDiagnostic,
}

pub fn solve_support(s: &SpecPair) -> Result<Vec<SupportInterval>> {
    Ok(Saddle::new(s)?.intervals)
}

/// Single-point density; `z1` is `None` in frozen regions.
pub fn density(s: &SpecPair, t: f64) -> Result<(f64, Option<Complex64>)> {
    let p = Saddle::new(s)?.density(t)?;
    Ok((p.rho, p.z1))
}

pub fn limit_shape(s: &SpecPair, u_grid: &[f64]) -> Result<Vec<f64>> {
    Saddle::new(s)?.limit_shape(u_grid)
}

pub fn classify_edges(s: &SpecPair) -> Result<EdgeReport> {
    Saddle::new(s)?.classify_edges()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QRegime {
    Line,
    Empty,
    Full,
}

/// Conjectural straight-line shape for `x_i = q^{i−1}`, `y_j = q^{b(j−1)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantQLine {
    pub conjecture: bool,
    pub regime: QRegime,
    pub density: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub support: (f64, f64),
    /// The support reaches the right corner `t = c`.
    pub right_corner: bool,
}

pub fn constant_q_line(q: f64, b: f64, c: f64) -> Result<ConstantQLine> {
    if !(q > 0.0 && q != 1.0 && b != 0.0 && b.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument("need q > 0, q ≠ 1, b ≠ 0, c > 0".into()));
    }
    if b > 0.0 {
        let full = q > 1.0;
        return Ok(ConstantQLine {
            conjecture: true,
            regime: if full { QRegime::Full } else { QRegime::Empty },
            density: 0.0,
            slope: None,
            intercept: None,
            support: if full { (c - 1.0, c - 1.0) } else { (0.0, 0.0) },
            right_corner: false,
        });
    }
    let rho = b / (b - 1.0);
    let slope = (1.0 + b) / (1.0 - b);
    let (intercept, support) = if q > 1.0 {
        (2.0 / (1.0 - b), (-1.0, (-1.0 / b).min(c - 1.0 - b * c)))
    } else {
        (-2.0 * b * c / (1.0 - b), ((b * c).max(c - 1.0 + 1.0 / b), c))
    };
    Ok(ConstantQLine {
        conjecture: true,
        regime: QRegime::Line,
        density: rho,
        slope: Some(slope),
        intercept: Some(intercept),
        support,
        right_corner: (support.1 - c).abs() < 1e-12,
    })
}

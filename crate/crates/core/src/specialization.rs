//! Specialization families for f and g, the parameter grids and the saddle-point transforms.
//!
//! The transforms are the iterated logarithmic derivatives of the action,
//! `I_{j+1}(z) = z d/dz I_j(z)`, with
//! `I1(z) = ∫ f z/(1 − f z) ds + c ∫ g/(z + g) ds`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_complex;

/// Relative guard band around the branch segments.
pub const EPS_CUT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpecFamily {
    Constant { alpha: f64 },
    PiecewiseConstant { values: Vec<f64>, shares: Vec<f64> },
    Monomial { alpha: f64, exponent: f64 },
    /// `alpha * exp(-rate * s)`; a negative rate gives an increasing function.
    Exponential { alpha: f64, rate: f64 },
    Grid { values: Vec<f64> },
    /// `base + amplitude * sin(2π frequency s)` with a positive integer frequency.
    Sine { base: f64, amplitude: f64, frequency: u32 },
    ConstantQ { q: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Const(f64),
    Mono { alpha: f64, m: f64 },
    Exp { alpha: f64, rate: f64 },
    Sin { base: f64, amp: f64, freq: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    s0: f64,
    s1: f64,
    shape: Shape,
}

impl Shape {
    fn eval(&self, s: f64) -> f64 {
        match *self {
            Shape::Const(v) => v,
            Shape::Mono { alpha, m } => {
                if m == 0.0 {
                    alpha
                } else {
                    alpha * s.powf(m)
                }
            }
            Shape::Exp { alpha, rate } => alpha * (-rate * s).exp(),
            Shape::Sin { base, amp, freq } => base + amp * (2.0 * std::f64::consts::PI * freq * s).sin(),
        }
    }
}

impl Piece {
    fn range(&self) -> (f64, f64) {
        if let Shape::Sin { base, amp, .. } = self.shape {
            // whole periods only
            return (base - amp.abs(), base + amp.abs());
        }
        let a = self.shape.eval(self.s0);
        let b = self.shape.eval(self.s1);
        (a.min(b), a.max(b))
    }

    /// s in the piece with h(s) = target, for monotone shapes.
    fn solve(&self, target: f64) -> Option<f64> {
        if matches!(self.shape, Shape::Const(_) | Shape::Sin { .. }) {
            return None;
        }
        let (lo, hi) = self.range();
        if !(target > lo && target < hi) {
            return None;
        }
        let inc = self.shape.eval(self.s1) > self.shape.eval(self.s0);
        let (mut a, mut b) = (self.s0, self.s1);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (self.shape.eval(m) < target) == inc {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

impl SpecFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidFamily(m.to_string()));
        match self {
            SpecFamily::Constant { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => bad("constant alpha must be positive"),
            SpecFamily::PiecewiseConstant { values, shares } => {
                if values.is_empty() || values.len() != shares.len() {
                    return bad("piecewise values and shares must be nonempty and equally long");
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) || shares.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return bad("piecewise values and shares must be positive");
                }
                Ok(())
            }
            SpecFamily::Monomial { alpha, exponent } if !(*alpha > 0.0 && *exponent >= 0.0 && exponent.is_finite()) => {
                bad("monomial needs alpha > 0 and exponent >= 0")
            }
            SpecFamily::Exponential { alpha, rate } if !(*alpha > 0.0 && rate.is_finite()) => bad("exponential needs alpha > 0"),
            SpecFamily::Grid { values } if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) => bad("grid values must be positive"),
            SpecFamily::ConstantQ { q, b } if !(*q > 0.0 && b.is_finite()) => bad("constant_q needs q > 0"),
            SpecFamily::Sine { base, amplitude, frequency } if !(base.is_finite() && amplitude.abs() < *base && *frequency >= 1) => {
                bad("sine needs |amplitude| < base and frequency ≥ 1")
            }
            _ => Ok(()),
        }
    }

    fn pieces(&self) -> Result<Vec<Piece>> {
        Ok(match self {
            SpecFamily::Constant { alpha } => vec![Piece { s0: 0.0, s1: 1.0, shape: Shape::Const(*alpha) }],
            SpecFamily::Monomial { alpha, exponent } => {
                vec![Piece { s0: 0.0, s1: 1.0, shape: Shape::Mono { alpha: *alpha, m: *exponent } }]
            }
            SpecFamily::Exponential { alpha, rate } => {
                vec![Piece { s0: 0.0, s1: 1.0, shape: Shape::Exp { alpha: *alpha, rate: *rate } }]
            }
            SpecFamily::PiecewiseConstant { values, shares } => {
                let total: f64 = shares.iter().sum();
                let mut s = 0.0;
                let mut out = Vec::new();
                for (i, (v, w)) in values.iter().zip(shares).enumerate() {
                    let s1 = if i + 1 == values.len() { 1.0 } else { s + w / total };
                    out.push(Piece { s0: s, s1, shape: Shape::Const(*v) });
                    s = s1;
                }
                out
            }
            SpecFamily::Grid { values } => {
                let m = values.len() as f64;
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| Piece { s0: i as f64 / m, s1: (i + 1) as f64 / m, shape: Shape::Const(*v) })
                    .collect()
            }
            SpecFamily::Sine { base, amplitude, frequency } => vec![Piece {
                s0: 0.0,
                s1: 1.0,
                shape: Shape::Sin { base: *base, amp: *amplitude, freq: *frequency as f64 },
            }],
            SpecFamily::ConstantQ { .. } => {
                return Err(Error::InvalidFamily("constant_q families have no continuum transforms".into()))
            }
        })
    }

    /// h(s) for s ∈ [0, 1].
    pub fn eval(&self, s: f64) -> Result<f64> {
        let pieces = self.pieces()?;
        let p = pieces.iter().find(|p| s <= p.s1).unwrap_or(pieces.last().unwrap());
        Ok(p.shape.eval(s))
    }

    /// Grid values h(i/m) for i = 1..m (index-based powers for constant_q).
    pub fn grid(&self, m: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let v: Vec<f64> = match self {
            SpecFamily::ConstantQ { q, b } => (0..m).map(|i| q.powf(b * i as f64)).collect(),
            SpecFamily::Grid { values } => {
                if values.len() != m {
                    return Err(Error::InvalidFamily(format!("grid has {} values, expected {m}", values.len())));
                }
                values.clone()
            }
            _ => (1..=m).map(|i| self.eval(i as f64 / m as f64)).collect::<Result<_>>()?,
        };
        if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidFamily("grid evaluation produced a nonpositive value".into()));
        }
        Ok(v)
    }

    /// (min, max) of h on [0, 1].
    pub fn range(&self) -> Result<(f64, f64)> {
        let ps = self.pieces()?;
        Ok(ps.iter().map(|p| p.range()).fold((f64::INFINITY, f64::NEG_INFINITY), |a, r| (a.0.min(r.0), a.1.max(r.1))))
    }

    /// Ranges of h per piece, used as the singular sets of the transforms.
    fn piece_ranges(&self) -> Result<Vec<(f64, f64)>> {
        Ok(self.pieces()?.iter().map(|p| p.range()).collect())
    }

    /// ∫₀¹ φ(h(s)) ds with breakpoints at joints and where h(s) = `hot` (if given).
    pub(crate) fn integrate<F: Fn(f64) -> Complex64>(&self, phi: F, hot: Option<f64>) -> Result<Complex64> {
        self.integrate_with(phi, hot, None)
    }

    /// As `integrate`, with an optional antiderivative for exponential pieces:
    /// `anti(h0, h1) = Ψ(h0) − Ψ(h1)` where `Ψ′(h) = φ(h)/h`.
    fn integrate_with<F: Fn(f64) -> Complex64>(
        &self,
        phi: F,
        hot: Option<f64>,
        anti: Option<&dyn Fn(f64, f64) -> Complex64>,
    ) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for p in self.pieces()? {
            if let Shape::Const(v) = p.shape {
                total += phi(v) * (p.s1 - p.s0);
                continue;
            }
            if let (Shape::Exp { rate, .. }, Some(anti)) = (p.shape, anti) {
                if rate != 0.0 {
                    total += anti(p.shape.eval(p.s0), p.shape.eval(p.s1)) / rate;
                    continue;
                }
            }
            let mut br = Vec::new();
            if let Some(s) = hot.and_then(|t| p.solve(t)) {
                br.push(s);
            }
            let r = integrate_complex(|s| phi(p.shape.eval(s)), p.s0, p.s1, &br, 1e-14, 1e-12);
            if !r.converged || !r.value.re.is_finite() || !r.value.im.is_finite() {
                return Err(Error::NoConvergence("transform quadrature".into()));
            }
            total += r.value;
        }
        Ok(total)
    }

    pub fn is_monomial_vanishing(&self) -> bool {
        matches!(self, SpecFamily::Monomial { exponent, .. } if *exponent > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecPair {
    pub f: SpecFamily,
    pub g: SpecFamily,
    pub c: f64,
}

impl SpecPair {
    pub fn new(f: SpecFamily, g: SpecFamily, c: f64) -> Result<Self> {
        let s = SpecPair { f, g, c };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(alpha: f64, c: f64) -> Self {
        SpecPair { f: SpecFamily::Constant { alpha }, g: SpecFamily::Constant { alpha: 1.0 }, c }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidFamily("c must be positive".into()));
        }
        self.f.validate()?;
        self.g.validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sp: SpecPair = serde_json::from_str(s).map_err(|e| Error::InvalidFamily(e.to_string()))?;
        sp.validate()?;
        Ok(sp)
    }

    /// Whether the continuum transforms are defined.
    pub fn has_transforms(&self) -> bool {
        !matches!(self.f, SpecFamily::ConstantQ { .. }) && !matches!(self.g, SpecFamily::ConstantQ { .. })
    }

    fn check_cut(&self, z: Complex64) -> Result<()> {
        let err = || Err(Error::OnBranchCut { re: z.re, im: z.im });
        let scale = z.norm().max(1e-300);
        if z.im.abs() > EPS_CUT * scale {
            return Ok(());
        }
        for (lo, hi) in self.f.piece_ranges()? {
            // 1 − h z = 0 for h ∈ [lo, hi]
            if z.re > 0.0 {
                let h = 1.0 / z.re;
                if h >= lo * (1.0 - EPS_CUT) && h <= hi * (1.0 + EPS_CUT) {
                    return err();
                }
            }
        }
        for (lo, hi) in self.g.piece_ranges()? {
            if lo > 0.0 && -z.re >= lo * (1.0 - EPS_CUT) && -z.re <= hi * (1.0 + EPS_CUT) {
                return err();
            }
            if lo == 0.0 && z.re <= 0.0 && -z.re <= hi * (1.0 + EPS_CUT) {
                return err();
            }
        }
        Ok(())
    }

    fn transform(&self, order: u8, z: Complex64) -> Result<Complex64> {
        self.transform_impl(order, z, true)
    }

    fn transform_impl(&self, order: u8, z: Complex64, closed: bool) -> Result<Complex64> {
        self.validate()?;
        if !self.has_transforms() {
            return Err(Error::InvalidFamily("constant_q families have no continuum transforms".into()));
        }
        if z == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(if order == 1 { self.c } else { 0.0 }, 0.0));
        }
        self.check_cut(z)?;
        let one = Complex64::new(1.0, 0.0);
        let fpart = move |h: f64| {
            let u = z * h;
            let d = one - u;
            match order {
                1 => u / d,
                2 => u / (d * d),
                3 => u * (one + u) / (d * d * d),
                _ => u * (one + u * 4.0 + u * u) / (d * d * d * d),
            }
        };
        let gpart = move |h: f64| {
            let d = z + h;
            match order {
                1 => h / d,
                2 => -(z * h) / (d * d),
                3 => -(z * h * (h - z)) / (d * d * d),
                _ => -(z * h * (z * z - z * 4.0 * h + h * h)) / (d * d * d * d),
            }
        };
        let fhot = if z.re > 0.0 { Some(z.re / z.norm_sqr()) } else { None };
        let ghot = if z.re < 0.0 { Some(-z.re) } else { None };
        // Antiderivatives in h: exponential pieces sweep h along a segment, and
        // along a straight segment avoiding 0 the principal log of the ratio is exact.
        let fanti = move |h0: f64, h1: f64| {
            let psi = |h: f64| {
                let u = z * h;
                let d = one - u;
                match order {
                    2 => u / d,
                    3 => u / (d * d),
                    _ => u * (one + u) / (d * d * d),
                }
            };
            match order {
                1 => ((one - z * h1) / (one - z * h0)).ln(),
                _ => psi(h0) - psi(h1),
            }
        };
        let ganti = move |h0: f64, h1: f64| {
            let psi = |h: f64| {
                let d = z + h;
                match order {
                    2 => z / d,
                    3 => z * h / (d * d),
                    _ => z * h * (h - z) / (d * d * d),
                }
            };
            match order {
                1 => ((z + h0) / (z + h1)).ln(),
                _ => psi(h0) - psi(h1),
            }
        };
        let (fa, ga): (Option<&dyn Fn(f64, f64) -> Complex64>, Option<&dyn Fn(f64, f64) -> Complex64>) =
            if closed { (Some(&fanti), Some(&ganti)) } else { (None, None) };
        let a = self.f.integrate_with(fpart, fhot, fa)?;
        let b = self.g.integrate_with(gpart, ghot, ga)?;
        Ok(a + b * self.c)
    }

    pub fn transform_i1(&self, z: Complex64) -> Result<Complex64> {
        self.transform(1, z)
    }
    pub fn transform_i2(&self, z: Complex64) -> Result<Complex64> {
        self.transform(2, z)
    }
    pub fn transform_i3(&self, z: Complex64) -> Result<Complex64> {
        self.transform(3, z)
    }
    pub fn transform_i4(&self, z: Complex64) -> Result<Complex64> {
        self.transform(4, z)
    }

    /// Real-axis convenience: `transform_ij(order, x)` real part.
    pub fn transform_real(&self, order: u8, x: f64) -> Result<f64> {
        Ok(self.transform(order, Complex64::new(x, 0.0))?.re)
    }

    /// Real segments on which the transforms are singular: 1/f values and −g values.
    pub fn cut_segments(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for (lo, hi) in self.f.piece_ranges()? {
            let a = if hi > 0.0 { 1.0 / hi } else { f64::INFINITY };
            let b = if lo > 0.0 { 1.0 / lo } else { f64::INFINITY };
            out.push((a, b));
        }
        for (lo, hi) in self.g.piece_ranges()? {
            out.push((-hi, -lo));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(out)
    }
}

pub fn x_values(s: &SpecPair, n: usize) -> Result<Vec<f64>> {
    s.f.grid(n)
}

pub fn y_values(s: &SpecPair, k: usize) -> Result<Vec<f64>> {
    s.g.grid(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grids() {
        let s = SpecPair::constant(2.0, 1.0);
        assert_eq!(x_values(&s, 3).unwrap(), vec![2.0, 2.0, 2.0]);
        let e = SpecFamily::Exponential { alpha: 1.0, rate: 2f64.ln() };
        let v = e.grid(2).unwrap();
        assert!((v[0] - 2f64.powf(-0.5)).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
        let m = SpecFamily::Monomial { alpha: 1.0, exponent: 1.0 };
        assert_eq!(m.grid(4).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        let q = SpecFamily::ConstantQ { q: 2.0, b: -1.0 };
        assert_eq!(q.grid(3).unwrap(), vec![1.0, 0.5, 0.25]);
        assert!(SpecFamily::Constant { alpha: -1.0 }.grid(2).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let js = r#"{"f":{"family":"monomial","alpha":1.0,"exponent":3.0},"g":{"family":"constant","alpha":1.0},"c":2.0}"#;
        let s = SpecPair::from_json(js).unwrap();
        assert_eq!(s.f, SpecFamily::Monomial { alpha: 1.0, exponent: 3.0 });
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(SpecPair::from_json(&back).unwrap(), s);
    }

    #[test]
    fn constant_closed_forms() {
        let (a, cc) = (1.7, 2.3);
        let s = SpecPair::constant(a, cc);
        for &z in &[c(0.2, 0.1), c(-3.0, 0.5), c(0.4, -2.0), c(5.0, 0.0), c(-0.5, 0.0)] {
            let i1 = a * z / (1.0 - a * z) + cc / (z + 1.0);
            let i2 = a * z / ((1.0 - a * z) * (1.0 - a * z)) - cc * z / ((z + 1.0) * (z + 1.0));
            assert!((s.transform_i1(z).unwrap() - i1).norm() < 1e-12);
            assert!((s.transform_i2(z).unwrap() - i2).norm() < 1e-12);
        }
        assert_eq!(s.transform_i1(c(0.0, 0.0)).unwrap(), c(cc, 0.0));
        assert_eq!(s.transform_i3(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(s.transform_i1(c(1.0 / a, 0.0)), Err(Error::OnBranchCut { .. })));
        assert!(matches!(s.transform_i2(c(-1.0, 1e-12)), Err(Error::OnBranchCut { .. })));
    }

    #[test]
    fn zplus_root_constant() {
        let s = SpecPair::constant(1.0, 4.0);
        assert!(s.transform_i2(c(3.0, 0.0)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn higher_transforms_are_log_derivatives() {
        let s = SpecPair::new(
            SpecFamily::Exponential { alpha: 0.8, rate: 1.3 },
            SpecFamily::PiecewiseConstant { values: vec![2.0, 0.5], shares: vec![0.7, 1.3] },
            2.0,
        )
        .unwrap();
        for &z in &[c(0.3, 0.4), c(-0.7, 1.1), c(0.9, 0.0), c(-3.0, 0.0)] {
            let h = 1e-5;
            for order in 1..4u8 {
                let d = (s.transform(order, z * (1.0 + h)).unwrap() - s.transform(order, z * (1.0 - h)).unwrap()) / (2.0 * h);
                let next = s.transform(order + 1, z).unwrap();
                assert!((d - next).norm() < 1e-6 * (1.0 + next.norm()), "order {order} at {z}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let s = SpecPair::new(SpecFamily::Monomial { alpha: 4.0, exponent: 3.0 }, SpecFamily::Constant { alpha: 1.0 }, 1.5).unwrap();
        let z = c(0.6, 0.3);
        let a = s.transform_i1(z).unwrap();
        let b = s.transform_i1(z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-13);
        assert!(s.transform_i1(c(-0.5, 0.0)).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn exponential_i1_matches_logarithmic_form() {
        // f = e^{-γs}, g = e^{-δ c s}: each integral has an elementary antiderivative.
        let (g, d, cc) = (0.9, 0.4, 1.5);
        let s = SpecPair::new(
            SpecFamily::Exponential { alpha: 1.0, rate: g },
            SpecFamily::Exponential { alpha: 1.0, rate: d * cc },
            cc,
        )
        .unwrap();
        let mut seed = 12345u64;
        for _ in 0..20 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = ((seed >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0;
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = ((seed >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0;
            let z = c(re, im);
            let one = c(1.0, 0.0);
            // ∫ fz/(1−fz) = (1/γ) ln((1 − e^{-γ} z)/(1 − z))
            let fpart = ((one - z * (-g).exp()) / (one - z)).ln() / g;
            // c ∫ g/(z+g) with g = e^{-δcs}: (1/δ) ln((1 + z)/(e^{-δc} + z)) ... times 1
            let gpart = ((one + z) / (z + (-d * cc).exp())).ln() / d;
            let want = fpart + gpart;
            let got = s.transform_impl(1, z, false).unwrap();
            assert!((got - want).norm() < 1e-9, "{z}: {got} vs {want}");
            for order in 1..=4u8 {
                let a = s.transform_impl(order, z, true).unwrap();
                let b = s.transform_impl(order, z, false).unwrap();
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "order {order} at {z}");
            }
        }
    }
}

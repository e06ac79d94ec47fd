//! Partitions in an n×k box, Maya diagrams and the rotated boundary profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition, dropping trailing zeros. Fails if not weakly decreasing.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("{parts:?} is not weakly decreasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn rectangle(rows: usize, cols: usize) -> Self {
        if cols == 0 {
            return Self::empty();
        }
        Partition { parts: vec![cols; rows] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part `i` (0-based), zero past the end.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn fits_box(&self, n: usize, k: usize) -> bool {
        self.parts.len() <= n && self.part(0) <= k
    }

    fn check_box(&self, n: usize, k: usize) -> Result<()> {
        if self.fits_box(n, k) {
            Ok(())
        } else {
            Err(Error::BoxViolation { parts: self.parts.clone(), n, k })
        }
    }
}

pub fn conjugate(p: &Partition) -> Partition {
    let m = p.part(0);
    let parts = (1..=m).map(|j| p.parts.iter().take_while(|&&x| x >= j).count()).collect();
    Partition { parts }
}

/// All partitions fitting the n×k box, in reverse-lexicographic order.
pub fn box_partitions(n: usize, k: usize) -> Vec<Partition> {
    fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if cur.len() == n {
            out.push(Partition::new(cur.clone()).unwrap());
            return;
        }
        for v in (0..=max).rev() {
            cur.push(v);
            rec(n, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Particle positions a_i = λ_i − i + 1/2, stored doubled (odd integers), strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MayaDiagram {
    pub positions2: Vec<i64>,
    pub n: usize,
    pub k: usize,
}

impl MayaDiagram {
    pub fn positions(&self) -> Vec<f64> {
        self.positions2.iter().map(|&p| p as f64 / 2.0).collect()
    }

    /// Inverse of [`maya`].
    pub fn to_partition(&self) -> Partition {
        let parts = self
            .positions2
            .iter()
            .enumerate()
            .map(|(i, &p)| ((p - 1) / 2 + i as i64 + 1) as usize)
            .collect();
        Partition::new(parts).expect("Maya positions decrease")
    }
}

pub fn maya(p: &Partition, n: usize, k: usize) -> Result<MayaDiagram> {
    p.check_box(n, k)?;
    let positions2 = (1..=n).map(|i| 2 * (p.part(i - 1) as i64 - i as i64) + 1).collect();
    Ok(MayaDiagram { positions2, n, k })
}

/// Number of particles strictly right of a threshold given in doubled units.
pub fn count_right(m: &MayaDiagram, threshold2: i64) -> usize {
    m.positions2.iter().filter(|&&a| a > threshold2).count()
}

/// Upper boundary of the rotated diagram rescaled by 1/n, with u ∈ [−1, c] and c = k/n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
}

impl BoundaryProfile {
    pub fn c(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn eval(&self, u: f64) -> f64 {
        let bp = &self.breakpoints;
        if u <= bp[0] || u >= *bp.last().unwrap() {
            return u.abs();
        }
        let h = 1.0 / self.n as f64;
        let i = (((u - bp[0]) / h).floor() as usize).min(bp.len() - 2);
        let w = (u - bp[i]) / h;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

pub fn boundary_profile(p: &Partition, n: usize, k: usize) -> Result<BoundaryProfile> {
    let m = maya(p, n, k)?;
    let nf = n as f64;
    let mut breakpoints = Vec::with_capacity(n + k + 1);
    let mut values = Vec::with_capacity(n + k + 1);
    for x in -(n as i64)..=(k as i64) {
        let right = count_right(&m, 2 * x) as f64;
        breakpoints.push(x as f64 / nf);
        values.push((x as f64 + 2.0 * right) / nf);
    }
    Ok(BoundaryProfile { breakpoints, values, n })
}

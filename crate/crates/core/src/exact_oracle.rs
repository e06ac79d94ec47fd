//! Exact rational ground truth on small boxes.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{box_partitions, conjugate, maya, Partition};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Complete homogeneous symmetric polynomials h_0..=h_m.
fn complete_homogeneous(x: &[Rational], m: usize) -> Vec<Rational> {
    let mut h = vec![Rational::zero(); m + 1];
    h[0] = Rational::one();
    for xi in x {
        for d in 1..=m {
            let prev = h[d - 1].clone();
            h[d] += prev * xi;
        }
    }
    h
}

/// Exact determinant by Gaussian elimination over the rationals.
pub fn det_rational(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let v = &factor * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Schur polynomial via the Jacobi–Trudi determinant det[h_{λ_i − i + j}].
pub fn schur(p: &Partition, x: &[Rational]) -> Rational {
    let l = p.len();
    if l == 0 {
        return Rational::one();
    }
    if l > x.len() {
        return Rational::zero();
    }
    let h = complete_homogeneous(x, p.part(0) + l);
    let m: Vec<Vec<Rational>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| {
                    let idx = p.part(i) as i64 - i as i64 + j as i64;
                    if idx < 0 {
                        Rational::zero()
                    } else {
                        h[idx as usize].clone()
                    }
                })
                .collect()
        })
        .collect();
    det_rational(m)
}

/// Schur polynomial by enumerating semistandard fillings with entries ≤ len(x).
pub fn schur_ssyt(p: &Partition, x: &[Rational]) -> Rational {
    let cells: Vec<(usize, usize)> = p.parts().iter().enumerate().flat_map(|(r, &l)| (0..l).map(move |c| (r, c))).collect();
    let mut fill = vec![0usize; cells.len()];
    let mut total = Rational::zero();
    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        p: &Partition,
        fill: &mut Vec<usize>,
        x: &[Rational],
        total: &mut Rational,
    ) {
        if idx == cells.len() {
            let mut prod = Rational::one();
            for &v in fill.iter() {
                prod *= &x[v];
            }
            *total += prod;
            return;
        }
        let (r, c) = cells[idx];
        // cells are row-major; left neighbour is idx-1, upper neighbour is in the previous row
        let mut lo = 0;
        if c > 0 {
            lo = lo.max(fill[idx - 1]);
        }
        if r > 0 {
            let up: usize = p.parts()[..r - 1].iter().sum::<usize>() + c;
            lo = lo.max(fill[up] + 1);
        }
        for v in lo..x.len() {
            fill[idx] = v;
            rec(idx + 1, cells, p, fill, x, total);
        }
    }
    rec(0, &cells, p, &mut fill, x, &mut total);
    total
}

/// Number of semistandard tableaux of shape λ with entries ≤ m.
pub fn count_ssyt(p: &Partition, m: usize) -> u64 {
    let ones = vec![Rational::one(); m];
    schur(p, &ones).to_integer().to_u64().expect("count fits u64")
}

/// Σ_{λ ⊆ k^n} s_λ(x) s_λ'(y) − Π (1 + x_i y_j); zero by the dual Cauchy identity.
pub fn dual_cauchy_residual(x: &[Rational], y: &[Rational]) -> Rational {
    let (n, k) = (x.len(), y.len());
    let mut sum = Rational::zero();
    for lam in box_partitions(n, k) {
        sum += schur(&lam, x) * schur(&conjugate(&lam), y);
    }
    let mut prod = Rational::one();
    for xi in x {
        for yj in y {
            prod *= Rational::one() + xi * yj;
        }
    }
    sum - prod
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureTable {
    pub n: usize,
    pub k: usize,
    #[serde(skip)]
    pub entries: Vec<(Partition, Rational)>,
}

impl MeasureTable {
    pub fn total(&self) -> Rational {
        self.entries.iter().map(|e| e.1.clone()).sum()
    }

    pub fn prob(&self, p: &Partition) -> Rational {
        self.entries.iter().find(|e| &e.0 == p).map(|e| e.1.clone()).unwrap_or_else(Rational::zero)
    }

    /// Law of λ₁ as a vector indexed by 0..=k.
    pub fn first_row_law(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.k + 1];
        for (p, w) in &self.entries {
            out[p.part(0)] += w;
        }
        out
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn measure_table(x: &[Rational], y: &[Rational]) -> Result<MeasureTable> {
    let (n, k) = (x.len(), y.len());
    let count = binomial_f64(n + k, n);
    if count > 1e6 {
        return Err(Error::TooLarge(count as usize));
    }
    let mut z = Rational::one();
    for xi in x {
        for yj in y {
            z *= Rational::one() + xi * yj;
        }
    }
    let entries = box_partitions(n, k)
        .into_iter()
        .map(|lam| {
            let w = schur(&lam, x) * schur(&conjugate(&lam), y) / &z;
            (lam, w)
        })
        .collect();
    Ok(MeasureTable { n, k, entries })
}

/// P(m ∈ Maya(λ)) for a half-integer m given doubled.
pub fn onepoint_bruteforce(table: &MeasureTable, m2: i64) -> Rational {
    table
        .entries
        .iter()
        .filter(|(p, _)| maya(p, table.n, table.k).unwrap().positions2.contains(&m2))
        .map(|e| e.1.clone())
        .sum()
}

/// max over λ of |μ(λ) − det[K(a_i, a_j)]|, with the kernel taking doubled positions.
pub fn determinantal_check<K: Fn(i64, i64) -> Result<f64>>(table: &MeasureTable, kernel_eval: K) -> Result<f64> {
    let n = table.n;
    let lo = -(n as i64);
    let size = n + table.k;
    let mut cache = vec![vec![f64::NAN; size]; size];
    for i in 0..size {
        for j in 0..size {
            cache[i][j] = kernel_eval(2 * (lo + i as i64) + 1, 2 * (lo + j as i64) + 1)?;
        }
    }
    let idx = |a2: i64| ((a2 - 1) / 2 - lo) as usize;
    let mut worst: f64 = 0.0;
    for (p, w) in &table.entries {
        let a = maya(p, n, table.k)?.positions2;
        let m = DMatrix::from_fn(n, n, |i, j| cache[idx(a[i])][idx(a[j])]);
        let d = if n == 0 { 1.0 } else { m.determinant() };
        worst = worst.max((d - to_f64(w)).abs());
    }
    Ok(worst)
}

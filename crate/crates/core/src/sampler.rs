//! Exact sampling through Bernoulli matrices and dual RSK insertion.
//!
//! A 0/1 matrix is read row by row; each 1 at (i, j) inserts the column index j into a
//! row-strict tableau (the leftmost entry ≥ j is replaced and bumped downward) while
//! i is recorded at the new cell. The recording tableau is `P` (entries ≤ n, shape λ);
//! the transpose of the insertion tableau is `Q` (entries ≤ k, shape λ').

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::partitions::{conjugate, Partition};
use crate::specialization::{x_values, y_values, SpecPair};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMatrix {
    pub n: usize,
    pub k: usize,
    bits: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(n: usize, k: usize) -> Self {
        BinaryMatrix { n, k, bits: vec![0; n * k] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let n = rows.len();
        let k = rows.first().map_or(0, |r| r.len());
        let bits = rows.iter().flat_map(|r| r.iter().map(|&b| (b != 0) as u8)).collect();
        BinaryMatrix { n, k, bits }
    }

    /// Matrix whose row-major bits are the low `n*k` bits of `code`.
    pub fn from_code(n: usize, k: usize, code: u64) -> Self {
        let bits = (0..n * k).map(|b| ((code >> b) & 1) as u8).collect();
        BinaryMatrix { n, k, bits }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.k + j] != 0
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.k + j] = v as u8;
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

/// Semistandard tableau stored row by row (1-based entries).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct Ssyt {
    pub rows: Vec<Vec<u32>>,
}

impl Ssyt {
    pub fn shape(&self) -> Partition {
        Partition::new(self.rows.iter().map(|r| r.len()).collect()).expect("tableau rows decrease")
    }

    pub fn transpose(&self) -> Ssyt {
        let width = self.rows.first().map_or(0, |r| r.len());
        let rows = (0..width)
            .map(|c| self.rows.iter().take_while(|r| r.len() > c).map(|r| r[c]).collect())
            .collect();
        Ssyt { rows }
    }

    pub fn is_semistandard(&self, max_entry: u32) -> bool {
        let shape_ok = self.rows.windows(2).all(|w| w[0].len() >= w[1].len()) && self.rows.iter().all(|r| !r.is_empty());
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let cols_ok = self.rows.windows(2).all(|w| w[1].iter().zip(&w[0]).all(|(b, a)| a < b));
        let range_ok = self.rows.iter().flatten().all(|&v| v >= 1 && v <= max_entry);
        shape_ok && rows_ok && cols_ok && range_ok
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableauPair {
    pub p: Ssyt,
    pub q: Ssyt,
}

impl TableauPair {
    pub fn shape(&self) -> Partition {
        self.p.shape()
    }
}

/// Row-strict insertion; returns the row index where a new cell appeared.
fn insert_row_strict(t: &mut Vec<Vec<u32>>, mut x: u32) -> usize {
    let mut r = 0;
    loop {
        if r == t.len() {
            t.push(vec![x]);
            return r;
        }
        let row = &mut t[r];
        let pos = row.partition_point(|&y| y < x);
        if pos == row.len() {
            row.push(x);
            return r;
        }
        let y = row[pos];
        row[pos] = x;
        x = y;
        r += 1;
    }
}

/// Dual RSK with a per-insertion hook receiving (P_raw, recording) after each step.
fn dual_rsk_with<F: FnMut(&[Vec<u32>], &[Vec<u32>])>(m: &BinaryMatrix, mut hook: F) -> TableauPair {
    let mut ins: Vec<Vec<u32>> = Vec::new();
    let mut rec: Vec<Vec<u32>> = Vec::new();
    for i in 0..m.n {
        for j in 0..m.k {
            if m.get(i, j) {
                let r = insert_row_strict(&mut ins, j as u32 + 1);
                if r == rec.len() {
                    rec.push(Vec::new());
                }
                rec[r].push(i as u32 + 1);
                hook(&ins, &rec);
            }
        }
    }
    TableauPair { p: Ssyt { rows: rec }, q: Ssyt { rows: ins }.transpose() }
}

pub fn dual_rsk(m: &BinaryMatrix) -> TableauPair {
    dual_rsk_with(m, |_, _| {})
}

/// Dual RSK that checks semistandardness and shape duality after every insertion.
pub fn dual_rsk_checked(m: &BinaryMatrix) -> std::result::Result<TableauPair, String> {
    let mut fail = None;
    let out = dual_rsk_with(m, |ins, rec| {
        if fail.is_some() {
            return;
        }
        let p = Ssyt { rows: rec.to_vec() };
        let q = Ssyt { rows: ins.to_vec() }.transpose();
        if !p.is_semistandard(m.n as u32) || !q.is_semistandard(m.k as u32) || q.shape() != conjugate(&p.shape()) {
            fail = Some(format!("invariant broken: P={:?} Q={:?}", p.rows, q.rows));
        }
    });
    match fail {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Shape of dual RSK computed on bitset rows, no recording tableau.
///
/// A whole matrix row is inserted at once: row insertion of an increasing
/// word sends the bumped letters down in increasing order, so each tableau row
/// can take its entire input set before the next row is touched.
pub fn dual_rsk_shape(m: &BinaryMatrix) -> Partition {
    let mut rows = BitRows::new(m.k);
    let mut s = vec![0u64; rows.words];
    for i in 0..m.n {
        s.iter_mut().for_each(|w| *w = 0);
        for j in 0..m.k {
            if m.get(i, j) {
                s[j / 64] |= 1u64 << (j % 64);
            }
        }
        rows.insert_set(&mut s);
    }
    rows.shape()
}

struct BitRows {
    words: usize,
    data: Vec<u64>,
    lens: Vec<usize>,
}

impl BitRows {
    fn new(k: usize) -> Self {
        BitRows { words: k.div_ceil(64).max(1), data: Vec::new(), lens: Vec::new() }
    }

    /// Inserts the increasing word with letter set `s`; `s` is consumed.
    fn insert_set(&mut self, s: &mut [u64]) {
        let w = self.words;
        let mut bumped = vec![0u64; w];
        let mut avail = vec![0u64; w];
        let mut r = 0;
        while s.iter().any(|&x| x != 0) {
            if r == self.lens.len() {
                self.data.extend_from_slice(s);
                self.lens.push(s.iter().map(|x| x.count_ones() as usize).sum());
                return;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            // a letter already in the row bumps itself; the others take the
            // next free letter above them, in increasing order
            for t in 0..w {
                bumped[t] = s[t] & row[t];
                avail[t] = row[t] & !s[t];
                s[t] &= !row[t];
                row[t] |= s[t];
            }
            let mut grow = 0;
            let mut floor = 0;
            'letters: for t in 0..w {
                let mut word = s[t];
                while word != 0 {
                    let x = t * 64 + word.trailing_zeros() as usize;
                    word &= word - 1;
                    let start = x.max(floor);
                    let mut wi = start / 64;
                    let mut cur = avail[wi] & (!0u64 << (start % 64));
                    while cur == 0 {
                        wi += 1;
                        if wi == w {
                            // no free letter left: the rest lengthen the row
                            grow += 1 + word.count_ones() as usize + s[t + 1..].iter().map(|v| v.count_ones() as usize).sum::<usize>();
                            break 'letters;
                        }
                        cur = avail[wi];
                    }
                    let bit = cur & cur.wrapping_neg();
                    avail[wi] &= !bit;
                    row[wi] &= !bit;
                    bumped[wi] |= bit;
                    floor = wi * 64 + bit.trailing_zeros() as usize + 1;
                    if floor == w * 64 {
                        grow += word.count_ones() as usize + s[t + 1..].iter().map(|v| v.count_ones() as usize).sum::<usize>();
                        break 'letters;
                    }
                }
            }
            self.lens[r] += grow;
            s.copy_from_slice(&bumped);
            r += 1;
        }
    }

    fn shape(&self) -> Partition {
        Partition::new(self.lens.clone()).expect("row lengths decrease")
    }
}

/// splitmix64 finalizer applied to (base, index).
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn thresholds(x: &[f64], y: &[f64]) -> Vec<u64> {
    let mut t = Vec::with_capacity(x.len() * y.len());
    for &xi in x {
        for &yj in y {
            let w = xi * yj;
            let p = if w.is_infinite() { 1.0 } else { w / (1.0 + w) };
            // saturating cast: p = 1 maps to u64::MAX
            t.push(if p >= 1.0 { u64::MAX } else { (p * 18446744073709551616.0) as u64 });
        }
    }
    t
}

fn draw(n: usize, k: usize, thr: &[u64], seed: u64) -> BinaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = thr
        .iter()
        .map(|&t| {
            let u = rng.next_u64();
            (u < t || t == u64::MAX) as u8
        })
        .collect();
    BinaryMatrix { n, k, bits }
}

/// Matrix with independent entries, P(1) = x_i y_j / (1 + x_i y_j).
pub fn sample_matrix_xy(x: &[f64], y: &[f64], seed: u64) -> BinaryMatrix {
    draw(x.len(), y.len(), &thresholds(x, y), seed)
}

pub fn sample_matrix(s: &SpecPair, n: usize, k: usize, seed: u64) -> Result<BinaryMatrix> {
    Ok(sample_matrix_xy(&x_values(s, n)?, &y_values(s, k)?, seed))
}

pub fn sample_diagram(s: &SpecPair, n: usize, k: usize, seed: u64) -> Result<Partition> {
    Ok(dual_rsk_shape(&sample_matrix(s, n, k, seed)?))
}

pub fn sample_pair(s: &SpecPair, n: usize, k: usize, seed: u64) -> Result<TableauPair> {
    Ok(dual_rsk(&sample_matrix(s, n, k, seed)?))
}

/// Sampler for fixed parameter vectors, reusing the Bernoulli thresholds.
#[derive(Debug, Clone)]
pub struct XySampler {
    n: usize,
    k: usize,
    thr: Vec<u64>,
}

impl XySampler {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        XySampler { n: x.len(), k: y.len(), thr: thresholds(x, y) }
    }

    pub fn from_spec(s: &SpecPair, n: usize, k: usize) -> Result<Self> {
        Ok(Self::new(&x_values(s, n)?, &y_values(s, k)?))
    }

    pub fn matrix(&self, seed: u64) -> BinaryMatrix {
        draw(self.n, self.k, &self.thr, seed)
    }

    pub fn diagram(&self, seed: u64) -> Partition {
        dual_rsk_shape(&self.matrix(seed))
    }

    /// `count` samples with seeds `derive_seed(base_seed, i)`, in index order.
    pub fn batch(&self, count: usize, base_seed: u64) -> Vec<(u64, Partition)> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(base_seed, i);
                (seed, self.diagram(seed))
            })
            .collect()
    }
}

pub fn sample_batch(s: &SpecPair, n: usize, k: usize, count: usize, base_seed: u64) -> Result<Vec<(u64, Partition)>> {
    Ok(XySampler::from_spec(s, n, k)?.batch(count, base_seed))
}

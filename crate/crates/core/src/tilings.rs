//! Tableau pairs as lozenge tilings of a hexagon glued from two trapezoids and
//! as domino tilings of an Aztec diamond glued from two rectangular parts.
//!
//! Lozenge lattice: vertical lines `x = 0..=n+k`, lattice points on line `x`
//! at heights in `Z + x/2`. All heights are stored doubled. A right triangle
//! `R(x, y)` has its vertical side `[y, y+1]` on line `x`; a left triangle
//! `L(x, y)` has its vertical side on line `x`, apex on line `x − 1`.
//!
//! Domino lattice: unit squares of the order-`N` Aztec diamond (`N = n + k`)
//! in rotated coordinates `u = cx + cy`, `v = cy − cx` of their centres, so
//! `|u|, |v| ≤ N` and `u + v` is odd. A domino joins `(u, v)` to `(u+1, v±1)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{conjugate, Partition};
use crate::sampler::{Ssyt, TableauPair};

/// Interlacing rows: `rows[ℓ]` is the shape of the entries `≤ ℓ`, padded to `ℓ` parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtPattern {
    pub rows: Vec<Vec<usize>>,
}

impl GtPattern {
    pub fn top(&self) -> &[usize] {
        self.rows.last().map_or(&[], |r| r.as_slice())
    }

    /// `rows[ℓ+1]_{i+1} ≤ rows[ℓ]_i ≤ rows[ℓ+1]_i` for every level.
    pub fn interlaces(&self) -> bool {
        self.rows.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            b.len() == a.len() + 1 && a.iter().enumerate().all(|(i, &x)| b[i + 1] <= x && x <= b[i])
        })
    }
}

pub fn gt_pattern(t: &Ssyt, n: usize) -> GtPattern {
    let rows = (0..=n)
        .map(|l| {
            let mut row: Vec<usize> = t.rows.iter().map(|r| r.iter().filter(|&&v| v as usize <= l).count()).collect();
            row.resize(l, 0);
            row.truncate(l);
            row
        })
        .collect();
    GtPattern { rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Lozenge,
    Aztec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tile {
    /// `L(x,y) ∪ R(x,y)`: a particle on line `x`.
    Horizontal,
    /// `R(x,y) ∪ L(x+1,y+1/2)`.
    Up,
    /// `R(x,y) ∪ L(x+1,y−1/2)`.
    Down,
    /// The left half `L(x,y)` of a particle cut by the gluing line.
    CutLeft,
    /// The right half `R(x,y)` of a hole cut by the gluing line.
    CutRight,
    /// `(u,v)–(u+1,v+1)`, left square in an even column: a vertical domino.
    North,
    /// `(u,v)–(u+1,v+1)`, left square in an odd column.
    South,
    /// `(u,v)–(u+1,v−1)`, left square in an even column: a horizontal domino.
    East,
    /// `(u,v)–(u+1,v−1)`, left square in an odd column.
    West,
}

/// A tile anchored at `(x, y)`: for lozenges the line and doubled lower end of
/// its vertical segment, for dominoes `(u, v)` of the left square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub tile: Tile,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingScene {
    pub kind: SceneKind,
    pub n: usize,
    pub k: usize,
    pub placements: Vec<Placement>,
}

fn check_pair(pair: &TableauPair, n: usize, k: usize) -> Result<Partition> {
    let lam = pair.p.shape();
    if !pair.p.is_semistandard(n as u32) && !pair.p.rows.is_empty() {
        return Err(Error::ShapeMismatch(format!("P is not semistandard with entries ≤ {n}")));
    }
    if !pair.q.is_semistandard(k as u32) && !pair.q.rows.is_empty() {
        return Err(Error::ShapeMismatch(format!("Q is not semistandard with entries ≤ {k}")));
    }
    if pair.q.shape() != conjugate(&lam) {
        return Err(Error::ShapeMismatch(format!("shape(Q) = {:?} is not the conjugate of {:?}", pair.q.shape().parts(), lam.parts())));
    }
    if !lam.fits_box(n, k) {
        return Err(Error::ShapeMismatch(format!("{:?} leaves the {n}x{k} box", lam.parts())));
    }
    Ok(lam)
}

/// Doubled segment `[lo, hi]` of line `x` inside the glued hexagon.
fn lozenge_line(n: usize, k: usize, x: i64) -> (i64, i64) {
    let (n, k) = (n as i64, k as i64);
    if x <= n {
        (-x, 2 * k + x)
    } else {
        let j = x - n;
        (-n + j, 2 * k + n - j)
    }
}

/// Pair the free triangles of one strip in height order.
fn match_strip(x: i64, rights: &[i64], lefts: &[i64], out: &mut Vec<Placement>) -> Result<()> {
    let mut all: Vec<(i64, bool)> = rights.iter().map(|&y| (y, true)).chain(lefts.iter().map(|&y| (y, false))).collect();
    all.sort_unstable();
    for pair in all.chunks(2) {
        let ok = pair.len() == 2 && pair[0].1 != pair[1].1 && pair[1].0 - pair[0].0 == 1;
        if !ok {
            return Err(Error::ShapeMismatch(format!("strip {x} cannot be matched near height {}", pair[0].0)));
        }
        let (r, l) = if pair[0].1 { (pair[0].0, pair[1].0) } else { (pair[1].0, pair[0].0) };
        out.push(Placement { tile: if l > r { Tile::Up } else { Tile::Down }, x, y: r });
    }
    Ok(())
}

/// Lozenge tiling: the left trapezoid carries the pattern of `P` on lines
/// `0..=n`, the right trapezoid the pattern of `Q` on lines `n+k−m`, with
/// `Q`'s particles turned upside down so that on the gluing line they fill the
/// holes of `P`'s Maya diagram.
pub fn lozenge_scene(pair: &TableauPair, n: usize, k: usize) -> Result<TilingScene> {
    check_pair(pair, n, k)?;
    let gp = gt_pattern(&pair.p, n);
    let gq = gt_pattern(&pair.q, k);
    let total = (n + k) as i64;
    // (line, doubled height, takes the left triangle, takes the right triangle)
    let mut particles: Vec<(i64, i64, bool, bool)> = Vec::new();
    for (l, row) in gp.rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let y = 2 * (v as i64 - i as i64 - 1) + l as i64;
            particles.push((l as i64, y, true, l < n));
        }
    }
    for (m, row) in gq.rows.iter().enumerate() {
        let x = total - m as i64;
        for (j, &v) in row.iter().enumerate() {
            let y = -2 * (v as i64 - j as i64 - 1) - 2 + (n + k - m) as i64;
            particles.push((x, y, m < k, true));
        }
    }
    let mut placements = Vec::new();
    let mut taken_l: HashMap<i64, Vec<i64>> = HashMap::new();
    let mut taken_r: HashMap<i64, Vec<i64>> = HashMap::new();
    for &(x, y, left, right) in &particles {
        let tile = match (left, right) {
            (true, true) => Tile::Horizontal,
            (true, false) => Tile::CutLeft,
            (false, true) => Tile::CutRight,
            (false, false) => unreachable!(),
        };
        placements.push(Placement { tile, x, y });
        if left {
            taken_l.entry(x).or_default().push(y);
        }
        if right {
            taken_r.entry(x).or_default().push(y);
        }
    }
    for x in 0..total {
        let (lo, hi) = lozenge_line(n, k, x);
        let (lo1, hi1) = lozenge_line(n, k, x + 1);
        let tr = taken_r.get(&x).cloned().unwrap_or_default();
        let tl = taken_l.get(&(x + 1)).cloned().unwrap_or_default();
        let rights: Vec<i64> = (lo..hi).step_by(2).filter(|y| !tr.contains(y)).collect();
        let lefts: Vec<i64> = (lo1..hi1).step_by(2).filter(|y| !tl.contains(y)).collect();
        match_strip(x, &rights, &lefts, &mut placements)?;
    }
    placements.sort();
    Ok(TilingScene { kind: SceneKind::Lozenge, n, k, placements })
}

/// Parts of `mu` padded to `m` entries, as indices `μ_i + m − i` (`i` from 1).
fn slots(mu: &[usize], m: usize) -> Vec<i64> {
    (0..m).map(|i| mu.get(i).copied().unwrap_or(0) as i64 + (m - i - 1) as i64).collect()
}

fn column_v(big_n: i64, col: i64, r: i64) -> i64 {
    let v_min = if col % 2 == 0 { -big_n + 1 } else { -big_n };
    v_min + 2 * r
}

fn column_size(big_n: i64, col: i64) -> i64 {
    if col % 2 == 0 {
        big_n
    } else {
        big_n + 1
    }
}

fn domino_tile(col: i64, dv: i64) -> Tile {
    match (col % 2 == 0, dv > 0) {
        (true, true) => Tile::North,
        (false, true) => Tile::South,
        (true, false) => Tile::East,
        (false, false) => Tile::West,
    }
}

/// Domino tiling. Column `c = u + N` splits into squares matched to the left
/// and to the right. In the first part (columns `0..=2n`) the left-matched
/// squares of column `2j` encode level `j` of `P`'s pattern and the
/// right-matched squares of column `2j+1` level `j+1`; in the second part the
/// conjugates of `Q`'s levels `k − d` take over, column `2(n+d)`.
pub fn aztec_scene(pair: &TableauPair, n: usize, k: usize) -> Result<TilingScene> {
    check_pair(pair, n, k)?;
    let gp = gt_pattern(&pair.p, n);
    let gq = gt_pattern(&pair.q, k);
    let big_n = (n + k) as i64;
    let cols = 2 * big_n + 1;
    // left-matched index sets, per column
    let mut left: Vec<Vec<i64>> = vec![Vec::new(); cols as usize];
    for j in 0..=big_n {
        let ju = j as usize;
        let y = if ju <= n {
            slots(&gp.rows[ju], ju)
        } else {
            let d = ju - n;
            slots(conjugate(&Partition::new(gq.rows[k - d].clone())?).parts(), ju)
        };
        left[2 * ju] = y;
        if j == big_n {
            break;
        }
        let z = if ju < n {
            slots(&gp.rows[ju + 1], ju + 1)
        } else {
            let d = ju - n;
            let mut z = slots(conjugate(&Partition::new(gq.rows[k - d].clone())?).parts(), ju + 1);
            z.truncate(ju + 1);
            z
        };
        let size = column_size(big_n, 2 * j + 1);
        left[2 * ju + 1] = (0..size).filter(|r| !z.contains(r)).collect();
    }
    let mut placements = Vec::new();
    for c in 0..cols - 1 {
        let size = column_size(big_n, c);
        let lc = &left[c as usize];
        let rights: Vec<i64> = (0..size).filter(|r| !lc.contains(r)).map(|r| column_v(big_n, c, r)).collect();
        let mut lefts: Vec<i64> = left[c as usize + 1].iter().map(|&r| column_v(big_n, c + 1, r)).collect();
        let mut rights = rights;
        rights.sort_unstable();
        lefts.sort_unstable();
        if rights.len() != lefts.len() {
            return Err(Error::ShapeMismatch(format!("column {c} has {} right and {} left squares", rights.len(), lefts.len())));
        }
        for (&a, &b) in rights.iter().zip(&lefts) {
            if (b - a).abs() != 1 {
                return Err(Error::ShapeMismatch(format!("column {c} cannot be matched at v = {a}")));
            }
            placements.push(Placement { tile: domino_tile(c, b - a), x: c - big_n, y: a });
        }
    }
    placements.sort();
    Ok(TilingScene { kind: SceneKind::Aztec, n, k, placements })
}

/// Cells of the region, keyed as `(x, y, side)`; `side` separates the two
/// triangles sharing a lozenge segment.
fn region_cells(kind: SceneKind, n: usize, k: usize) -> Vec<(i64, i64, u8)> {
    let mut out = Vec::new();
    match kind {
        SceneKind::Lozenge => {
            let total = (n + k) as i64;
            for x in 0..=total {
                let (lo, hi) = lozenge_line(n, k, x);
                for y in (lo..hi).step_by(2) {
                    if x > 0 {
                        out.push((x, y, 0));
                    }
                    if x < total {
                        out.push((x, y, 1));
                    }
                }
            }
        }
        SceneKind::Aztec => {
            let big_n = (n + k) as i64;
            for u in -big_n..=big_n {
                for v in -big_n..=big_n {
                    if (u + v).rem_euclid(2) == 1 {
                        out.push((u, v, 0));
                    }
                }
            }
        }
    }
    out
}

fn tile_cells(p: &Placement) -> Vec<(i64, i64, u8)> {
    let (x, y) = (p.x, p.y);
    match p.tile {
        Tile::Horizontal => vec![(x, y, 0), (x, y, 1)],
        Tile::CutLeft => vec![(x, y, 0)],
        Tile::CutRight => vec![(x, y, 1)],
        Tile::Up => vec![(x, y, 1), (x + 1, y + 1, 0)],
        Tile::Down => vec![(x, y, 1), (x + 1, y - 1, 0)],
        Tile::North | Tile::South => vec![(x, y, 0), (x + 1, y + 1, 0)],
        Tile::East | Tile::West => vec![(x, y, 0), (x + 1, y - 1, 0)],
    }
}

/// Every cell of the region covered exactly once, nothing outside it.
pub fn check_exact_cover(scene: &TilingScene) -> Result<()> {
    let region = region_cells(scene.kind, scene.n, scene.k);
    let mut count: HashMap<(i64, i64, u8), u32> = region.iter().map(|&c| (c, 0)).collect();
    for p in &scene.placements {
        for c in tile_cells(p) {
            match count.get_mut(&c) {
                Some(v) => *v += 1,
                None => return Err(Error::ShapeMismatch(format!("{p:?} leaves the region"))),
            }
        }
    }
    if let Some((c, v)) = count.iter().find(|(_, &v)| v != 1) {
        return Err(Error::ShapeMismatch(format!("cell {c:?} covered {v} times")));
    }
    Ok(())
}

/// Domino types present in the first part (left square in columns `< 2n`)
/// and in the second.
pub fn domino_types(scene: &TilingScene) -> (Vec<Tile>, Vec<Tile>) {
    let big_n = (scene.n + scene.k) as i64;
    let split = 2 * scene.n as i64;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for p in &scene.placements {
        let side = if p.x + big_n < split { &mut a } else { &mut b };
        if !side.contains(&p.tile) {
            side.push(p.tile);
        }
    }
    a.sort();
    b.sort();
    (a, b)
}

/// At most three of the four domino types in each part.
pub fn three_of_four(scene: &TilingScene) -> bool {
    let (a, b) = domino_types(scene);
    scene.kind == SceneKind::Aztec && a.len() <= 3 && b.len() <= 3
}

/// Doubled Maya positions read off the gluing line, decreasing.
pub fn gluing_maya(scene: &TilingScene) -> Vec<i64> {
    let n = scene.n as i64;
    let big_n = n + scene.k as i64;
    let mut out: Vec<i64> = match scene.kind {
        SceneKind::Lozenge => scene
            .placements
            .iter()
            .filter(|p| p.tile == Tile::CutLeft)
            .map(|p| p.y - n + 1)
            .collect(),
        SceneKind::Aztec => {
            // squares of column 2n matched to the left are the right ends of dominoes from column 2n − 1
            let u = 2 * n - big_n;
            scene
                .placements
                .iter()
                .filter(|p| p.x == u - 1)
                .map(|p| {
                    let dv = if matches!(p.tile, Tile::North | Tile::South) { 1 } else { -1 };
                    p.y + dv - 2 * n + big_n
                })
                .collect()
        }
    };
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Polygon of a tile in plane coordinates (y pointing up).
pub fn tile_polygon(kind: SceneKind, p: &Placement) -> Vec<(f64, f64)> {
    match kind {
        SceneKind::Lozenge => {
            let x = p.x as f64;
            let y = p.y as f64 / 2.0;
            let pts: Vec<(f64, f64)> = match p.tile {
                Tile::Horizontal => vec![(x - 1.0, y + 0.5), (x, y), (x + 1.0, y + 0.5), (x, y + 1.0)],
                Tile::CutLeft => vec![(x - 1.0, y + 0.5), (x, y), (x, y + 1.0)],
                Tile::CutRight => vec![(x, y), (x + 1.0, y + 0.5), (x, y + 1.0)],
                Tile::Up => vec![(x, y), (x + 1.0, y + 0.5), (x + 1.0, y + 1.5), (x, y + 1.0)],
                Tile::Down => vec![(x, y), (x + 1.0, y - 0.5), (x + 1.0, y + 0.5), (x, y + 1.0)],
                _ => Vec::new(),
            };
            pts.into_iter().map(|(a, b)| (a * SQRT3_2, b)).collect()
        }
        SceneKind::Aztec => {
            let (u, v) = (p.x as f64, p.y as f64);
            let (x0, y0) = ((u - v - 1.0) / 2.0, (u + v - 1.0) / 2.0);
            let (w, h) = if matches!(p.tile, Tile::North | Tile::South) { (1.0, 2.0) } else { (2.0, 1.0) };
            vec![(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)]
        }
    }
}

pub fn polygon_area(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len();
    (0..m)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

fn colour(t: Tile) -> &'static str {
    match t {
        Tile::Horizontal | Tile::North => "#d95f02",
        Tile::Up | Tile::South => "#1b9e77",
        Tile::Down | Tile::East => "#7570b3",
        Tile::CutLeft | Tile::West => "#e7298a",
        Tile::CutRight => "#66a61e",
    }
}

/// SVG drawing with tiles in placement order and one fill per tile type.
pub fn render_svg(scene: &TilingScene) -> Vec<u8> {
    let scale = 12.0;
    let polys: Vec<(Tile, Vec<(f64, f64)>)> = scene.placements.iter().map(|p| (p.tile, tile_polygon(scene.kind, p))).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, pts) in &polys {
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if polys.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h) = ((x1 - x0) * scale + 2.0, (y1 - y0) * scale + 2.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#);
    let _ = writeln!(s, r##"<g stroke="#222" stroke-width="0.6" stroke-linejoin="round">"##);
    for (tile, pts) in &polys {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", (x - x0) * scale + 1.0, (y1 - y) * scale + 1.0))
            .collect();
        let _ = writeln!(s, r#"<polygon fill="{}" points="{}"/>"#, colour(*tile), coords.join(" "));
    }
    s.push_str("</g>\n</svg>\n");
    s.into_bytes()
}

/// Area of the region in plane units: unit triangles of side-height 1 for
/// lozenges, unit squares for dominoes.
pub fn region_area(kind: SceneKind, n: usize, k: usize) -> f64 {
    let cells = region_cells(kind, n, k).len() as f64;
    match kind {
        SceneKind::Lozenge => cells * SQRT3_2 / 2.0,
        SceneKind::Aztec => cells,
    }
}

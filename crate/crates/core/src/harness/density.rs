//! Grid coverage of `[-M, M]^n` by a point cloud.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Upper bound on the number of grid cells.
pub const MAX_CELLS: u64 = 10_000_000;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub box_halfwidth: f64,
    pub grid_step: f64,
    pub dimension: usize,
    pub total_cells: u64,
    pub covered_cells: u64,
    pub coverage: f64,
    /// Largest distance from an uncovered cell center to the nearest point.
    pub max_empty_gap: f64,
    pub points_used: u64,
    pub points_overflowed: u64,
}

/// A point cloud visited in independent chunks.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;
    fn chunks(&self) -> usize;
    fn for_each_in_chunk(&self, chunk: usize, f: &mut dyn FnMut(&[f64]));
}

/// Points held in memory.
pub struct SlicePoints<'a> {
    points: &'a [Vec<f64>],
    dim: usize,
}

impl<'a> SlicePoints<'a> {
    pub fn new(points: &'a [Vec<f64>], dim: usize) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::invalid(format!(
                "point {i} has {} coordinates, expected {dim}",
                points[i].len()
            )));
        }
        Ok(SlicePoints { points, dim })
    }
}

impl PointSource for SlicePoints<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn chunks(&self) -> usize {
        self.points.len().div_ceil(CHUNK)
    }

    fn for_each_in_chunk(&self, chunk: usize, f: &mut dyn FnMut(&[f64])) {
        let end = ((chunk + 1) * CHUNK).min(self.points.len());
        for p in &self.points[chunk * CHUNK..end] {
            f(p);
        }
    }
}

/// Orbit of `(1, ..., 1)` under the Kronecker tuple with `k <= k_max`.
///
/// For each `k` only the `s_j >= 0` with `|e^{k alpha_j} (-sqrt e)^{s_j}|`
/// in `[floor, halfwidth]` are produced. Larger values leave the box, and
/// when `floor <= h / e` and `0` is a cell boundary every smaller value
/// shares its cell with a produced value of the same sign at the same `k`,
/// so the covered cells equal those of the full orbit.
pub struct KroneckerPoints {
    alphas: Vec<f64>,
    k_max: u64,
    ln_floor: f64,
    ln_top: f64,
}

impl KroneckerPoints {
    const K_PER_CHUNK: u64 = 256;

    pub fn new(alphas: Vec<f64>, k_max: u64, floor: f64, halfwidth: f64) -> Result<Self> {
        if alphas.is_empty() || !(floor > 0.0) || !(halfwidth > floor) {
            return Err(Error::invalid("need exponents and 0 < floor < halfwidth"));
        }
        Ok(KroneckerPoints {
            alphas,
            k_max,
            ln_floor: floor.ln(),
            ln_top: halfwidth.ln(),
        })
    }

    /// Floor `h / 8` for grid step `h`.
    pub fn for_grid(alphas: Vec<f64>, k_max: u64, halfwidth: f64, step: f64) -> Result<Self> {
        Self::new(alphas, k_max, step / 8.0, halfwidth)
    }

    fn emit(&self, k: u64, f: &mut dyn FnMut(&[f64])) {
        let ranges: Vec<(u64, u64, f64)> = self
            .alphas
            .iter()
            .map(|&a| {
                let base = k as f64 * a;
                let lo = (2.0 * (self.ln_floor - base)).ceil().max(0.0) as u64;
                let hi = (2.0 * (self.ln_top - base)).floor();
                (lo, if hi < 0.0 { 0 } else { hi as u64 + 1 }, base)
            })
            .collect();
        if ranges.iter().any(|&(lo, end, _)| lo >= end) {
            return;
        }
        let n = ranges.len();
        let mut s: Vec<u64> = ranges.iter().map(|r| r.0).collect();
        let mut point = vec![0.0; n];
        loop {
            for j in 0..n {
                let sign = if s[j] % 2 == 0 { 1.0 } else { -1.0 };
                point[j] = sign * (ranges[j].2 + s[j] as f64 / 2.0).exp();
            }
            f(&point);
            let mut j = 0;
            loop {
                s[j] += 1;
                if s[j] < ranges[j].1 {
                    break;
                }
                s[j] = ranges[j].0;
                j += 1;
                if j == n {
                    return;
                }
            }
        }
    }
}

impl PointSource for KroneckerPoints {
    fn dim(&self) -> usize {
        self.alphas.len()
    }

    fn chunks(&self) -> usize {
        (self.k_max / Self::K_PER_CHUNK + 1) as usize
    }

    fn for_each_in_chunk(&self, chunk: usize, f: &mut dyn FnMut(&[f64])) {
        let start = chunk as u64 * Self::K_PER_CHUNK;
        let end = (start + Self::K_PER_CHUNK).min(self.k_max + 1);
        for k in start..end {
            self.emit(k, f);
        }
    }
}

struct Grid {
    m: f64,
    h: f64,
    per_axis: u64,
    dim: usize,
    total: u64,
}

impl Grid {
    fn new(dim: usize, m: f64, h: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::invalid(format!("need a box halfwidth M > 0, got {m}")));
        }
        if !(h > 0.0 && h <= 2.0 * m) {
            return Err(Error::invalid(format!("need 0 < h <= 2M, got h = {h}")));
        }
        // snap so that 2M/h within rounding of an integer is that integer
        let per_axis = (2.0 * m / h - 1e-9).ceil().max(1.0) as u64;
        let total = (0..dim).try_fold(1u64, |acc, _| acc.checked_mul(per_axis).filter(|&t| t <= MAX_CELLS));
        let total = total.ok_or_else(|| {
            Error::invalid(format!("{per_axis}^{dim} grid cells exceed the limit of {MAX_CELLS}"))
        })?;
        Ok(Grid {
            m,
            h,
            per_axis,
            dim,
            total,
        })
    }

    /// Linear cell index, or `None` outside the box.
    fn cell(&self, p: &[f64]) -> Option<u64> {
        let mut idx = 0u64;
        for &v in p.iter().rev() {
            if !(v.abs() <= self.m) {
                return None;
            }
            let i = (((v + self.m) / self.h).floor() as u64).min(self.per_axis - 1);
            idx = idx * self.per_axis + i;
        }
        Some(idx)
    }

    fn center(&self, mut idx: u64, out: &mut [f64]) {
        for c in out.iter_mut() {
            let i = idx % self.per_axis;
            idx /= self.per_axis;
            *c = -self.m + (i as f64 + 0.5) * self.h;
        }
    }

    fn diagonal(&self) -> f64 {
        self.per_axis as f64 * self.h * (self.dim as f64).sqrt()
    }
}

#[derive(Clone)]
struct Coverage {
    bits: Vec<u64>,
    used: u64,
    overflowed: u64,
}

impl Coverage {
    fn merge(mut self, other: Coverage) -> Coverage {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        self.used += other.used;
        self.overflowed += other.overflowed;
        self
    }

    fn covered(&self, idx: u64) -> bool {
        self.bits[(idx / 64) as usize] >> (idx % 64) & 1 == 1
    }
}

/// Coverage report for the points of `source` inside `[-M, M]^n`.
pub fn density_from_source(source: &dyn PointSource, m: f64, h: f64, exec: Execution) -> Result<DensityReport> {
    let grid = Grid::new(source.dim(), m, h)?;
    let words = grid.total.div_ceil(64) as usize;
    let empty = || Coverage {
        bits: vec![0; words],
        used: 0,
        overflowed: 0,
    };
    let cov = exec::fold_range(
        exec,
        0..source.chunks(),
        empty,
        |mut acc, chunk| {
            source.for_each_in_chunk(chunk, &mut |p| {
                if p.iter().any(|v| !v.is_finite()) {
                    acc.overflowed += 1;
                } else if let Some(i) = grid.cell(p) {
                    acc.bits[(i / 64) as usize] |= 1 << (i % 64);
                    acc.used += 1;
                }
            });
            acc
        },
        Coverage::merge,
    );
    let covered: u64 = cov.bits.iter().map(|w| w.count_ones() as u64).sum();
    let max_empty_gap = if covered == grid.total {
        0.0
    } else if cov.used == 0 {
        grid.diagonal()
    } else {
        max_gap(source, &grid, &cov, exec)
    };
    Ok(DensityReport {
        box_halfwidth: m,
        grid_step: h,
        dimension: grid.dim,
        total_cells: grid.total,
        covered_cells: covered,
        coverage: covered as f64 / grid.total as f64,
        max_empty_gap,
        points_used: cov.used,
        points_overflowed: cov.overflowed,
    })
}

/// Squared distance to the nearest zero of `f` along a line, in index
/// units (lower envelope of parabolas).
fn edt_line(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    v.push(0);
    z.push(f64::NEG_INFINITY);
    z.push(f64::INFINITY);
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = *v.last().unwrap();
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= z[v.len() - 1] {
                v.pop();
                z.pop();
                continue;
            }
            v.push(q);
            *z.last_mut().unwrap() = s;
            z.push(f64::INFINITY);
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact largest distance from an uncovered cell center to the nearest
/// point. Distances to covered cell centers come from a distance transform
/// and differ from the true ones by at most half a cell diagonal, so only
/// cells within a diagonal of the largest one need the exact search.
fn max_gap(source: &dyn PointSource, grid: &Grid, cov: &Coverage, exec: Execution) -> f64 {
    const FAR: f64 = 1e20;
    let side = grid.per_axis as usize;
    let total = grid.total as usize;
    let mut d2: Vec<f64> = (0..total).map(|i| if cov.covered(i as u64) { 0.0 } else { FAR }).collect();
    let (mut line, mut out, mut v, mut z) = (vec![0.0; side], vec![0.0; side], Vec::new(), Vec::new());
    let mut stride = 1;
    for _ in 0..grid.dim {
        for outer in 0..total / (stride * side) {
            for inner in 0..stride {
                let base = outer * stride * side + inner;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = d2[base + i * stride];
                }
                edt_line(&line, &mut out, &mut v, &mut z);
                for (i, o) in out.iter().enumerate() {
                    d2[base + i * stride] = *o;
                }
            }
        }
        stride *= side;
    }
    let half_diag = (grid.dim as f64).sqrt() / 2.0;
    let far = d2.iter().copied().fold(0.0, f64::max).sqrt();
    let cut = far - 2.0 * half_diag - 1e-9;
    let candidates: Vec<u64> = (0..grid.total)
        .filter(|&i| !cov.covered(i) && d2[i as usize].sqrt() >= cut)
        .collect();
    let centers: Vec<Vec<f64>> = exec::map_range(exec, 0..candidates.len(), |c| {
        let mut x = vec![0.0; grid.dim];
        grid.center(candidates[c], &mut x);
        x
    });
    let nearest = exec::fold_range(
        exec,
        0..source.chunks(),
        || vec![f64::INFINITY; centers.len()],
        |mut best, chunk| {
            source.for_each_in_chunk(chunk, &mut |p| {
                if p.iter().any(|v| !v.is_finite()) || grid.cell(p).is_none() {
                    return;
                }
                for (b, c) in best.iter_mut().zip(&centers) {
                    let d: f64 = c.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum();
                    if d < *b {
                        *b = d;
                    }
                }
            });
            best
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.min(y);
            }
            a
        },
    );
    nearest.into_iter().fold(0.0, f64::max).sqrt()
}

/// [`density_from_source`] for points in memory, all of dimension `dim`.
pub fn density_report(points: &[Vec<f64>], dim: usize, m: f64, h: f64, exec: Execution) -> Result<DensityReport> {
    density_from_source(&SlicePoints::new(points, dim)?, m, h, exec)
}

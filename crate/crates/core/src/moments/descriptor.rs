use serde::{Deserialize, Serialize};

use super::TruncatedMomentSequence;
use crate::error::{invalid, Error, Result};
use crate::polyalg::{binomial, monomial_count, MonomialTable, SemialgebraicSet};

/// Binary image on a regular grid in the plane.
///
/// Row 0 is the top row: cell `(i, j)` covers
/// `[x0 + j dx, x0 + (j+1) dx] x [y0 + (rows-1-i) dy, y0 + (rows-i) dy]`
/// with `(x0, y0)` the lower-left corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<bool>,
    pub origin: [f64; 2],
    pub cell_size: [f64; 2],
}

impl MaskGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<bool>, origin: [f64; 2], extent: [f64; 2]) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: cells.len() });
        }
        if !(extent[0] > 0.0 && extent[1] > 0.0) {
            return Err(invalid("mask extent must be positive"));
        }
        Ok(Self { rows, cols, cells, origin, cell_size: [extent[0] / cols as f64, extent[1] / rows as f64] })
    }

    /// Mask whose active cells are those with centre satisfying `inside`.
    pub fn from_predicate(
        rows: usize,
        cols: usize,
        origin: [f64; 2],
        extent: [f64; 2],
        inside: impl Fn(f64, f64) -> bool,
    ) -> Self {
        let dx = extent[0] / cols as f64;
        let dy = extent[1] / rows as f64;
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let cx = origin[0] + (j as f64 + 0.5) * dx;
                let cy = origin[1] + ((rows - 1 - i) as f64 + 0.5) * dy;
                cells.push(inside(cx, cy));
            }
        }
        Self { rows, cols, cells, origin, cell_size: [dx, dy] }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.cols + j]
    }

    pub fn active_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> ([f64; 2], [f64; 2]) {
        let x0 = self.origin[0] + j as f64 * self.cell_size[0];
        let y0 = self.origin[1] + (self.rows - 1 - i) as f64 * self.cell_size[1];
        ([x0, y0], [x0 + self.cell_size[0], y0 + self.cell_size[1]])
    }

    /// Same mask shifted by `t`.
    pub fn translated(&self, t: [f64; 2]) -> Self {
        let mut m = self.clone();
        m.origin = [self.origin[0] + t[0], self.origin[1] + t[1]];
        m
    }
}

/// One-dimensional probability measures with closed-form moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "law")]
pub enum Univariate {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Dirac {
        at: f64,
    },
    /// Beta(a, b) law rescaled from `[0, 1]` to `[lo, hi]`.
    Beta {
        a: f64,
        b: f64,
        lo: f64,
        hi: f64,
    },
}

impl Univariate {
    /// Raw moments `E[X^k]` for `k = 0..=order`.
    pub fn moments(&self, order: usize) -> Result<Vec<f64>> {
        match *self {
            Univariate::Dirac { at } => Ok((0..=order).map(|k| at.powi(k as i32)).collect()),
            Univariate::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(invalid("uniform law needs lo < hi"));
                }
                // E[U^k] on [0,1] is 1/(k+1).
                Ok(affine_moments(&(0..=order).map(|k| 1.0 / (k + 1) as f64).collect::<Vec<_>>(), lo, hi))
            }
            Univariate::Beta { a, b, lo, hi } => {
                if !(a > 0.0 && b > 0.0 && lo < hi) {
                    return Err(invalid("beta law needs a, b > 0 and lo < hi"));
                }
                let mut m = vec![1.0];
                for k in 1..=order {
                    let j = (k - 1) as f64;
                    m.push(m[k - 1] * (a + j) / (a + b + j));
                }
                Ok(affine_moments(&m, lo, hi))
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Univariate::Dirac { at } => (at, at),
            Univariate::Uniform { lo, hi } | Univariate::Beta { lo, hi, .. } => (lo, hi),
        }
    }
}

/// Moments of `lo + (hi - lo) U` from those of `U`.
fn affine_moments(m: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let w = hi - lo;
    (0..m.len())
        .map(|k| (0..=k).map(|j| binomial(k, j) as f64 * w.powi(j as i32) * lo.powi((k - j) as i32) * m[j]).sum())
        .collect()
}

/// Description of a probability measure from which moments are computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureDescriptor {
    /// Weighted point cloud; uniform weights when `weights` is absent.
    Empirical { points: Vec<Vec<f64>>, weights: Option<Vec<f64>> },
    /// Uniform measure on the union of active cells.
    UniformMask(MaskGrid),
    /// Product of independent one-dimensional laws.
    ClosedForm(Vec<Univariate>),
}

impl MeasureDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            MeasureDescriptor::Empirical { points, .. } => points.first().map_or(0, Vec::len),
            MeasureDescriptor::UniformMask(_) => 2,
            MeasureDescriptor::ClosedForm(f) => f.len(),
        }
    }
}

const SUPPORT_TOL: f64 = 1e-9;

/// Moments of `d` up to `order`, after checking the support lies in `set`.
pub fn descriptor_moments(
    d: &MeasureDescriptor,
    set: &SemialgebraicSet,
    order: usize,
) -> Result<TruncatedMomentSequence> {
    if matches!(d, MeasureDescriptor::Empirical { points, .. } if points.is_empty()) {
        return Err(Error::EmptySupport);
    }
    if d.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: d.dim() });
    }
    match d {
        MeasureDescriptor::Empirical { points, weights } => {
            if points.is_empty() {
                return Err(Error::EmptySupport);
            }
            let w = match weights {
                Some(w) => {
                    if w.len() != points.len() {
                        return Err(Error::DimensionMismatch { expected: points.len(), found: w.len() });
                    }
                    if w.iter().any(|v| !(*v >= 0.0)) {
                        return Err(invalid("negative or non-finite weight"));
                    }
                    let s: f64 = w.iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        return Err(invalid(format!("weights sum to {s}, not 1")));
                    }
                    w.clone()
                }
                None => vec![1.0 / points.len() as f64; points.len()],
            };
            for p in points {
                if p.len() != set.dim() {
                    return Err(Error::DimensionMismatch { expected: set.dim(), found: p.len() });
                }
                if !set.contains(p, SUPPORT_TOL) {
                    return Err(invalid(format!("sample {p:?} lies outside the domain")));
                }
            }
            TruncatedMomentSequence::from_points(points, &w, order)
        }
        MeasureDescriptor::UniformMask(mask) => mask_moments(mask, set, order),
        MeasureDescriptor::ClosedForm(laws) => {
            let corners = support_corners(laws);
            if corners.iter().any(|c| !set.contains(c, SUPPORT_TOL)) {
                return Err(invalid("closed-form support lies outside the domain"));
            }
            let per: Vec<Vec<f64>> = laws.iter().map(|l| l.moments(order)).collect::<Result<_>>()?;
            Ok(TruncatedMomentSequence::from_fn(laws.len(), order, |a| {
                a.exponents().iter().enumerate().map(|(i, &e)| per[i][e as usize]).product()
            }))
        }
    }
}

fn support_corners(laws: &[Univariate]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for l in laws {
        let (lo, hi) = l.support();
        out = out
            .into_iter()
            .flat_map(|c| {
                let mut a = c.clone();
                a.push(lo);
                let mut b = c;
                b.push(hi);
                [a, b]
            })
            .collect();
    }
    out
}

/// Per-cell tensor Gauss-Legendre with enough nodes to integrate every
/// monomial up to `order` exactly.
fn mask_moments(mask: &MaskGrid, set: &SemialgebraicSet, order: usize) -> Result<TruncatedMomentSequence> {
    let active = mask.active_count();
    if active == 0 {
        return Err(Error::EmptySupport);
    }
    for i in 0..mask.rows {
        for j in 0..mask.cols {
            if mask.get(i, j) {
                let (lo, hi) = mask.cell_bounds(i, j);
                for c in [[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]] {
                    if !set.contains(&c, SUPPORT_TOL) {
                        return Err(invalid(format!("mask cell ({i}, {j}) lies outside the domain")));
                    }
                }
            }
        }
    }
    let (nodes, weights) = gauss_legendre(order / 2 + 1);
    // Integrals of t^k over each column and each row interval.
    let interval_moments = |a: f64, b: f64| -> Vec<f64> {
        let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
        let mut out = vec![0.0; order + 1];
        for (t, w) in nodes.iter().zip(&weights) {
            let x = m + h * t;
            let mut p = h * w;
            for o in out.iter_mut() {
                *o += p;
                p *= x;
            }
        }
        out
    };
    let cols: Vec<Vec<f64>> = (0..mask.cols)
        .map(|j| {
            let (lo, hi) = mask.cell_bounds(0, j);
            interval_moments(lo[0], hi[0])
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..mask.rows)
        .map(|i| {
            let (lo, hi) = mask.cell_bounds(i, 0);
            interval_moments(lo[1], hi[1])
        })
        .collect();
    let table = MonomialTable::new(2, order);
    let mut values = vec![0.0; monomial_count(2, order)];
    for i in 0..mask.rows {
        let mut rowsum = vec![0.0; order + 1];
        for j in 0..mask.cols {
            if mask.get(i, j) {
                for (s, c) in rowsum.iter_mut().zip(&cols[j]) {
                    *s += c;
                }
            }
        }
        for (k, a) in table.indices().iter().enumerate() {
            values[k] += rowsum[a.get(0) as usize] * rows[i][a.get(1) as usize];
        }
    }
    let area = active as f64 * mask.cell_size[0] * mask.cell_size[1];
    values.iter_mut().for_each(|v| *v /= area);
    TruncatedMomentSequence::from_values(2, order, values)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

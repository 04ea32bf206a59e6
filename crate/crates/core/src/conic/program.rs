use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::moments::min_eigenvalue;

/// Kind of a cone block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    /// Symmetric positive semidefinite matrices.
    Psd,
    /// Nonnegative orthant, stored as a diagonal matrix.
    Nonneg,
}

/// Cone layout entry as seen by exporters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Free(usize),
    Psd(usize),
    Nonneg(usize),
}

/// Symmetric sparse matrix holding upper-triangle entries `(i, j, v)` with
/// `i <= j`, sorted and merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymSparse {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    /// Collects entries from either triangle; duplicates are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in entries {
            let key = if i <= j { (i, j) } else { (j, i) };
            *map.entry(key).or_insert(0.0) += v;
        }
        Self { entries: map.into_iter().filter(|(_, v)| *v != 0.0).map(|((i, j), v)| (i, j, v)).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    pub fn add_to(&self, m: &mut DMatrix<f64>, scale: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += scale * v;
            if i != j {
                m[(j, i)] += scale * v;
            }
        }
    }

    /// Trace inner product with a matrix; only the symmetric part of `m` counts.
    pub fn dot(&self, m: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(i, j, v)| if i == j { v * m[(i, i)] } else { v * (m[(i, j)] + m[(j, i)]) }).sum()
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }
}

/// Affine matrix map `F(y) = F_0 + sum_i y_i F_i` constrained to a cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub size: usize,
    pub constant: SymSparse,
    /// `(variable, F_i)` sorted by variable.
    pub coefficients: Vec<(usize, SymSparse)>,
    pub label: String,
}

impl ConeBlock {
    pub fn evaluate(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.to_dense(self.size);
        for (v, f) in &self.coefficients {
            f.add_to(&mut m, y[*v]);
        }
        m
    }

    /// Smallest eigenvalue of `F(y)` (smallest diagonal entry for LP blocks).
    pub fn min_eigenvalue(&self, y: &[f64]) -> f64 {
        let m = self.evaluate(y);
        match self.kind {
            ConeKind::Psd => min_eigenvalue(&m),
            ConeKind::Nonneg => m.diagonal().iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Accumulates a block entry by entry.
#[derive(Debug)]
pub struct BlockBuilder {
    kind: ConeKind,
    size: usize,
    constant: Vec<(usize, usize, f64)>,
    coefficients: BTreeMap<usize, Vec<(usize, usize, f64)>>,
    label: String,
}

impl BlockBuilder {
    pub fn new(kind: ConeKind, size: usize, label: impl Into<String>) -> Self {
        Self { kind, size, constant: Vec::new(), coefficients: BTreeMap::new(), label: label.into() }
    }

    pub fn add_constant(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.constant.push((i, j, v));
        }
    }

    pub fn add(&mut self, var: usize, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.coefficients.entry(var).or_default().push((i, j, v));
        }
    }

    pub fn build(self) -> ConeBlock {
        ConeBlock {
            kind: self.kind,
            size: self.size,
            constant: SymSparse::from_entries(self.constant),
            coefficients: self
                .coefficients
                .into_iter()
                .map(|(v, e)| (v, SymSparse::from_entries(e)))
                .filter(|(_, s)| !s.is_empty())
                .collect(),
            label: self.label,
        }
    }
}

/// Linear equality `sum a_k y_k = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Conic program over a free decision vector `y`:
///
/// ```text
/// minimize  c^T y + offset
/// s.t.      A y = b,
///           F_k(y) in K_k for every block k.
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub equalities: Vec<LinearEquality>,
    pub blocks: Vec<ConeBlock>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            objective_offset: 0.0,
            equalities: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(LinearEquality { terms, rhs });
    }

    pub fn add_block(&mut self, block: ConeBlock) {
        self.blocks.push(block);
    }

    pub fn cone_layout(&self) -> Vec<Cone> {
        std::iter::once(Cone::Free(self.num_vars))
            .chain(self.blocks.iter().map(|b| match b.kind {
                ConeKind::Psd => Cone::Psd(b.size),
                ConeKind::Nonneg => Cone::Nonneg(b.size),
            }))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(invalid("objective length differs from variable count"));
        }
        let finite = |v: f64| v.is_finite();
        if !self.objective.iter().copied().all(finite) || !self.objective_offset.is_finite() {
            return Err(invalid("non-finite objective"));
        }
        for e in &self.equalities {
            if e.terms.iter().any(|&(v, a)| v >= self.num_vars || !a.is_finite()) || !e.rhs.is_finite() {
                return Err(invalid("malformed equality row"));
            }
        }
        for b in &self.blocks {
            if b.size == 0 {
                return Err(invalid(format!("empty block '{}'", b.label)));
            }
            let mats = std::iter::once(&b.constant).chain(b.coefficients.iter().map(|(_, f)| f));
            for m in mats {
                for &(i, j, v) in &m.entries {
                    if i > j || j >= b.size || !v.is_finite() {
                        return Err(invalid(format!("malformed entry in block '{}'", b.label)));
                    }
                    if b.kind == ConeKind::Nonneg && i != j {
                        return Err(invalid(format!("off-diagonal entry in LP block '{}'", b.label)));
                    }
                }
            }
            if b.coefficients.iter().any(|(v, _)| *v >= self.num_vars) {
                return Err(invalid(format!("variable out of range in block '{}'", b.label)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    pub fn max_equality_residual(&self, y: &[f64]) -> f64 {
        self.equalities
            .iter()
            .map(|e| (e.terms.iter().map(|&(v, a)| a * y[v]).sum::<f64>() - e.rhs).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_block_eigenvalue(&self, y: &[f64]) -> f64 {
        self.blocks.iter().map(|b| b.min_eigenvalue(y)).fold(f64::INFINITY, f64::min)
    }
}

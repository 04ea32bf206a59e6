use nalgebra::DMatrix;

use super::TruncatedMomentSequence;
use crate::error::{Error, Result};
use crate::polyalg::{enumerate_indices, MultiIndex, Polynomial};

/// Symmetric matrix indexed by a graded-lex monomial basis.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    pub order: usize,
    pub basis: Vec<MultiIndex>,
    pub entries: DMatrix<f64>,
}

impl MomentMatrix {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `M_r(y)[alpha, beta] = y_{alpha + beta}` over `|alpha|, |beta| <= r`.
pub fn moment_matrix(y: &TruncatedMomentSequence, r: usize) -> Result<MomentMatrix> {
    localizing_matrix(y, &Polynomial::constant(y.dim(), 1.0), r)
}

/// `M_r(g y)[alpha, beta] = sum_gamma g_gamma y_{alpha + beta + gamma}`.
pub fn localizing_matrix(y: &TruncatedMomentSequence, g: &Polynomial, r: usize) -> Result<MomentMatrix> {
    if g.nvars() != y.dim() {
        return Err(Error::DimensionMismatch { expected: y.dim(), found: g.nvars() });
    }
    let needed = 2 * r + g.degree();
    if needed > y.order() {
        return Err(Error::DegreeOverflow { needed, available: y.order() });
    }
    let basis = enumerate_indices(y.dim(), r);
    let s = basis.len();
    let mut entries = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let ab = basis[i].add(&basis[j]);
            let v: f64 = g.terms().map(|(c, gc)| gc * y.values()[ab.add(c).grlex_rank()]).sum();
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(MomentMatrix { order: r, basis, entries })
}

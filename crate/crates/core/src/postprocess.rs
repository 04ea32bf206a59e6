//! Reading information back from moment sequences: the Christoffel-Darboux
//! kernel, support estimation by thresholding, linear quantities of
//! interest and weighted least-squares density fits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::moments::{moment_matrix, TruncatedMomentSequence};
use crate::polyalg::{enumerate_indices, DiagonalAffine, MonomialTable, MultiIndex, Polynomial};

/// Default Markov parameter for support thresholding.
pub const DEFAULT_ETA: f64 = 0.3;

/// Spectral model of the order-`r` moment matrix used to evaluate the
/// Christoffel-Darboux kernel `kappa(x, x) = phi(x)^T M_r^+ phi(x)`.
#[derive(Clone, Debug)]
pub struct ChristoffelModel {
    order: usize,
    basis: Vec<MultiIndex>,
    matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    rank: usize,
    rank_threshold: f64,
    // Columns v_i / sqrt(lambda_i) of the retained eigenpairs.
    whitening: DMatrix<f64>,
    table: MonomialTable,
    transform: Option<DiagonalAffine>,
}

/// Builds the model from `M_r(y)`. Eigenvalues below
/// `s(r) * 1e-10 * lambda_max` are treated as zero, which gives the
/// pseudo-inverse kernel when the moment matrix is singular.
pub fn christoffel_model(y: &TruncatedMomentSequence, r: usize) -> Result<ChristoffelModel> {
    ChristoffelModel::build(y, r, None)
}

impl ChristoffelModel {
    /// Same model, computed in the coordinates `t(x)`: the moments are
    /// pushed forward by `t` and evaluation points are mapped by `t` first.
    /// The kernel of a nonsingular moment matrix does not depend on this
    /// choice; a well-scaled `t` only improves conditioning.
    pub fn with_transform(y: &TruncatedMomentSequence, r: usize, t: &DiagonalAffine) -> Result<Self> {
        let pushed = y.pushforward(t)?;
        Self::build(&pushed, r, Some(t.clone()))
    }

    fn build(y: &TruncatedMomentSequence, r: usize, transform: Option<DiagonalAffine>) -> Result<Self> {
        if y.values().iter().any(|v| !v.is_finite()) {
            return Err(invalid("moment sequence has non-finite entries"));
        }
        let m = moment_matrix(y, r)?;
        let s = m.size();
        let eig = SymmetricEigen::new(m.entries.clone());
        let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let rank_threshold = s as f64 * 1e-10 * lmax;
        let keep: Vec<usize> = (0..s).filter(|&i| lmax > 0.0 && eig.eigenvalues[i] >= rank_threshold).collect();
        let mut whitening = DMatrix::zeros(s, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let f = 1.0 / eig.eigenvalues[i].sqrt();
            whitening.set_column(c, &(eig.eigenvectors.column(i) * f));
        }
        Ok(Self {
            order: r,
            basis: m.basis,
            matrix: m.entries,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            rank: keep.len(),
            rank_threshold,
            whitening,
            table: MonomialTable::new(y.dim(), r),
            transform,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// Number of basis monomials, `s(r)`.
    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn moment_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Effective rank of the moment matrix.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Absolute eigenvalue cutoff.
    pub fn rank_threshold(&self) -> f64 {
        self.rank_threshold
    }

    pub fn transform(&self) -> Option<&DiagonalAffine> {
        self.transform.as_ref()
    }

    /// `kappa(x, x)`; always nonnegative.
    pub fn kernel_diag(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let phi = match &self.transform {
            Some(t) => self.table.eval(&t.apply(x)),
            None => self.table.eval(x),
        };
        let phi = DVector::from_vec(phi);
        Ok(self.whitening.tr_mul(&phi).norm_squared())
    }

    /// Christoffel function `1 / kappa(x, x)`, infinite where the kernel
    /// vanishes.
    pub fn christoffel(&self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.kernel_diag(x)?)
    }
}

/// Axis-aligned grid of cell centers. Points are ordered with the first
/// coordinate varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RegularGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != counts.len() || lo.is_empty() {
            return Err(invalid("grid bounds and counts must have one entry per dimension"));
        }
        if counts.contains(&0) {
            return Err(invalid("grid resolution must be positive"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(invalid("grid bounds must satisfy lo < hi"));
        }
        Ok(Self { lo, hi, counts })
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.counts.len();
        let mut idx = vec![0usize; n];
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            out.push(
                (0..n)
                    .map(|k| {
                        let h = (self.hi[k] - self.lo[k]) / self.counts[k] as f64;
                        self.lo[k] + (idx[k] as f64 + 0.5) * h
                    })
                    .collect(),
            );
            for k in 0..n {
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

/// Kernel values and inside/outside labels on a set of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub points: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub eta: f64,
    /// Christoffel threshold `gamma_r = eta / s(r)`.
    pub gamma: f64,
    /// Kernel threshold `s(r) / eta`; a point is inside iff `kappa <= kappa_max`.
    pub kappa_max: f64,
    pub inside: Vec<bool>,
}

impl SupportEstimate {
    pub fn inside_fraction(&self) -> f64 {
        self.inside.iter().filter(|b| **b).count() as f64 / self.inside.len() as f64
    }
}

/// Labels `x` inside when `Lambda(x) >= eta / s(r)`, i.e.
/// `kappa(x, x) <= s(r) / eta`. For the measure the model was built
/// from, the labeled-inside set carries mass at least `1 - eta`.
pub fn support_estimate(model: &ChristoffelModel, points: &[Vec<f64>], eta: f64) -> Result<SupportEstimate> {
    if points.is_empty() {
        return Err(invalid("empty grid"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta must lie in (0, 1)"));
    }
    let s = model.basis_size() as f64;
    let kappa_max = s / eta;
    let kappa = points.iter().map(|x| model.kernel_diag(x)).collect::<Result<Vec<_>>>()?;
    let inside = kappa.iter().map(|k| *k <= kappa_max).collect();
    Ok(SupportEstimate { points: points.to_vec(), kappa, eta, gamma: eta / s, kappa_max, inside })
}

/// Estimate of `int g dmu` from moments: the Riesz functional.
pub fn qoi_estimate(y: &TruncatedMomentSequence, g: &Polynomial) -> Result<f64> {
    y.riesz(g)
}

/// Result of [`qoi_estimate_approx`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QoiApprox {
    pub value: f64,
    /// Least-squares polynomial fit `g_p`.
    pub fit: Polynomial,
    /// Largest absolute fit error over the samples, a proxy for `|g - g_p|_inf`.
    pub fit_residual: f64,
}

/// Estimate of `int g dmu` for a non-polynomial `g` given by samples: fit
/// a polynomial of degree `degree` by least squares, then apply the Riesz
/// functional to the fit.
pub fn qoi_estimate_approx(
    y: &TruncatedMomentSequence,
    points: &[Vec<f64>],
    values: &[f64],
    degree: usize,
) -> Result<QoiApprox> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), found: values.len() });
    }
    if points.is_empty() {
        return Err(invalid("no samples"));
    }
    if degree > y.order() {
        return Err(Error::DegreeOverflow { needed: degree, available: y.order() });
    }
    let table = MonomialTable::new(y.dim(), degree);
    let mut v = DMatrix::zeros(points.len(), table.len());
    for (i, x) in points.iter().enumerate() {
        if x.len() != y.dim() {
            return Err(Error::DimensionMismatch { expected: y.dim(), found: x.len() });
        }
        v.set_row(i, &DVector::from_vec(table.eval(x)).transpose());
    }
    let coef = lstsq(v.clone(), &DVector::from_column_slice(values))?.0;
    let fitted = &v * &coef;
    let fit_residual = fitted.iter().zip(values).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    let fit = Polynomial::from_terms(y.dim(), table.indices().iter().cloned().zip(coef.iter().copied()))?;
    Ok(QoiApprox { value: y.riesz(&fit)?, fit, fit_residual })
}

/// Result of [`density_fit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    /// Density `f` with respect to the reference measure.
    pub density: Polynomial,
    /// Weighted residual `sqrt(sum_alpha w_alpha (y_alpha - (G a)_alpha)^2)`.
    pub residual: f64,
    /// Largest moment degree used as a fitting row.
    pub row_degree: usize,
    pub rank: usize,
    /// Set when the least-squares matrix was rank deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

/// Fits a polynomial density `f` of degree `p` so that `f dnu` reproduces
/// the moments `y`: minimizes `sum_alpha w_alpha |y_alpha - sum_beta
/// nu_{alpha+beta} a_beta|^2`. Rows run over `|alpha| <= min(order(y),
/// order(nu) - p)`; weights, when given, are indexed like those rows.
pub fn density_fit(
    y: &TruncatedMomentSequence,
    reference: &TruncatedMomentSequence,
    p: usize,
    weights: Option<&[f64]>,
) -> Result<DensityFit> {
    if y.dim() != reference.dim() {
        return Err(Error::DimensionMismatch { expected: y.dim(), found: reference.dim() });
    }
    if reference.order() < p {
        return Err(Error::DegreeOverflow { needed: p, available: reference.order() });
    }
    let row_degree = y.order().min(reference.order() - p);
    let rows = enumerate_indices(y.dim(), row_degree);
    let cols = enumerate_indices(y.dim(), p);
    if rows.len() < cols.len() {
        return Err(invalid(format!(
            "{} moment rows cannot determine {} density coefficients",
            rows.len(),
            cols.len()
        )));
    }
    let w = match weights {
        Some(w) if w.len() != rows.len() => {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: w.len() })
        }
        Some(w) if w.iter().any(|v| !(*v > 0.0)) => return Err(invalid("weights must be positive")),
        Some(w) => w.to_vec(),
        None => vec![1.0; rows.len()],
    };
    let mut g = DMatrix::zeros(rows.len(), cols.len());
    let mut rhs = DVector::zeros(rows.len());
    for (i, a) in rows.iter().enumerate() {
        let sw = w[i].sqrt();
        rhs[i] = sw * y.get(a)?;
        for (j, b) in cols.iter().enumerate() {
            g[(i, j)] = sw * reference.get(&a.add(b))?;
        }
    }
    let (coef, rank) = lstsq(g.clone(), &rhs)?;
    let residual = (&g * &coef - &rhs).norm();
    Ok(DensityFit {
        density: Polynomial::from_terms(y.dim(), cols.into_iter().zip(coef.iter().copied()))?,
        residual,
        row_degree,
        rank,
        rank_deficient: rank < g.ncols(),
    })
}

/// Minimum-norm least squares through the SVD, cutting singular values
/// below `max(m, n) * eps * sigma_max`. Returns the solution and the rank.
fn lstsq(a: DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, usize)> {
    let cut = a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = cut * smax;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let x = svd.solve(b, eps).map_err(|e| invalid(e.to_string()))?;
    Ok((x, rank))
}

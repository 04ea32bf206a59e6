use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polyalg::{
    binomial, enumerate_indices, monomial_count, DiagonalAffine, MonomialTable, MultiIndex, Polynomial,
    ProductStructure,
};

/// Moments `y_alpha` for all `|alpha| <= order`, stored densely in
/// graded-lex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMomentSequence {
    dim: usize,
    order: usize,
    values: Vec<f64>,
}

impl TruncatedMomentSequence {
    pub fn zeros(dim: usize, order: usize) -> Self {
        Self { dim, order, values: vec![0.0; monomial_count(dim, order)] }
    }

    pub fn from_values(dim: usize, order: usize, values: Vec<f64>) -> Result<Self> {
        let want = monomial_count(dim, order);
        if values.len() != want {
            return Err(Error::DimensionMismatch { expected: want, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite moment"));
        }
        Ok(Self { dim, order, values })
    }

    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(&MultiIndex) -> f64) -> Self {
        let values = enumerate_indices(dim, order).iter().map(&mut f).collect();
        Self { dim, order, values }
    }

    /// Builds a sequence from an explicit index map; every index up to
    /// `order` must be present.
    pub fn from_map(dim: usize, order: usize, map: &BTreeMap<MultiIndex, f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(monomial_count(dim, order));
        for a in enumerate_indices(dim, order) {
            match map.get(&a) {
                Some(&v) => values.push(v),
                None => return Err(invalid(format!("missing moment for index {a:?}"))),
            }
        }
        Self::from_values(dim, order, values)
    }

    /// Moments of the weighted point cloud `sum_k w_k delta_{x_k}`.
    pub fn from_points(points: &[Vec<f64>], weights: &[f64], order: usize) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptySupport)?;
        if weights.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: weights.len() });
        }
        let table = MonomialTable::new(dim, order);
        let mut values = vec![0.0; table.len()];
        let mut buf = vec![0.0; table.len()];
        for (x, &w) in points.iter().zip(weights) {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
            }
            table.eval_into(x, &mut buf);
            for (v, b) in values.iter_mut().zip(&buf) {
                *v += w * b;
            }
        }
        Self::from_values(dim, order, values)
    }

    pub fn dirac(point: &[f64], order: usize) -> Self {
        Self::from_points(&[point.to_vec()], &[1.0], order).expect("one finite point")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        (self.mass() - 1.0).abs() <= tol
    }

    pub fn get(&self, alpha: &MultiIndex) -> Result<f64> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: alpha.dim() });
        }
        if alpha.degree() > self.order {
            return Err(Error::DegreeOverflow { needed: alpha.degree(), available: self.order });
        }
        Ok(self.values[alpha.grlex_rank()])
    }

    pub fn to_map(&self) -> BTreeMap<MultiIndex, f64> {
        enumerate_indices(self.dim, self.order).into_iter().zip(self.values.iter().copied()).collect()
    }

    /// The same moments cut down to a lower order.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::DegreeOverflow { needed: order, available: self.order });
        }
        Ok(Self { dim: self.dim, order, values: self.values[..monomial_count(self.dim, order)].to_vec() })
    }

    /// Moments of the image measure under a coordinatewise affine map,
    /// by binomial expansion of `(b + a x)^alpha`.
    pub fn pushforward(&self, t: &DiagonalAffine) -> Result<Self> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: t.dim() });
        }
        let indices = enumerate_indices(self.dim, self.order);
        // coeff[i][e][k] = C(e,k) a_i^k b_i^(e-k)
        let coeff: Vec<Vec<Vec<f64>>> = (0..self.dim)
            .map(|i| {
                let (a, b) = (t.scale()[i], t.shift()[i]);
                (0..=self.order)
                    .map(|e| {
                        (0..=e).map(|k| binomial(e, k) as f64 * a.powi(k as i32) * b.powi((e - k) as i32)).collect()
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; indices.len()];
        let mut beta = vec![0u32; self.dim];
        for (slot, alpha) in out.iter_mut().zip(&indices) {
            *slot = expand(alpha.exponents(), 0, &mut beta, 1.0, &coeff, self);
        }
        Self::from_values(self.dim, self.order, out)
    }

    /// Riesz functional `L_y(g) = sum_alpha g_alpha y_alpha`.
    pub fn riesz(&self, g: &Polynomial) -> Result<f64> {
        if g.nvars() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: g.nvars() });
        }
        g.terms().map(|(a, c)| Ok(c * self.get(a)?)).sum()
    }

    /// Moments of the product measure on the concatenated space, up to the
    /// smaller of the two orders.
    pub fn tensor(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let (n1, n2) = (self.dim, other.dim);
        Self::from_fn(n1 + n2, order, |g| {
            let a = g.slice(0, n1);
            let b = g.slice(n1, n2);
            self.values[a.grlex_rank()] * other.values[b.grlex_rank()]
        })
    }

    /// Moments of the marginal on one factor of a product space.
    pub fn marginal(&self, structure: &ProductStructure, factor: usize) -> Result<Self> {
        if structure.total_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: structure.total_dim() });
        }
        let d = structure.factor_dims[factor];
        Ok(Self::from_fn(d, self.order, |b| self.values[structure.embed(b, factor).grlex_rank()]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let k = monomial_count(self.dim, self.order.min(other.order));
        Ok(self.values[..k].iter().zip(&other.values[..k]).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

fn expand(
    alpha: &[u32],
    i: usize,
    beta: &mut [u32],
    acc: f64,
    coeff: &[Vec<Vec<f64>>],
    y: &TruncatedMomentSequence,
) -> f64 {
    if i == alpha.len() {
        return acc * y.values[MultiIndex::new(beta.to_vec()).grlex_rank()];
    }
    let e = alpha[i] as usize;
    let mut s = 0.0;
    for k in 0..=e {
        let c = coeff[i][e][k];
        if c != 0.0 {
            beta[i] = k as u32;
            s += expand(alpha, i + 1, beta, acc * c, coeff, y);
        }
    }
    beta[i] = 0;
    s
}

/// Embeds a factor index `beta` into the product space.
pub fn embed_marginal_index(beta: &MultiIndex, factor: usize, structure: &ProductStructure) -> Result<MultiIndex> {
    if factor >= structure.factor_dims.len() {
        return Err(invalid(format!("factor {factor} out of range")));
    }
    if beta.dim() != structure.factor_dims[factor] {
        return Err(Error::DimensionMismatch { expected: structure.factor_dims[factor], found: beta.dim() });
    }
    Ok(structure.embed(beta, factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_moments_are_powers() {
        let y = TruncatedMomentSequence::dirac(&[2.0, -1.0], 3);
        assert_eq!(y.get(&MultiIndex::new(vec![2, 1])).unwrap(), -4.0);
        assert_eq!(y.mass(), 1.0);
    }

    #[test]
    fn degree_overflow_reported() {
        let y = TruncatedMomentSequence::dirac(&[1.0], 2);
        assert!(matches!(y.get(&MultiIndex::new(vec![3])), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn pushforward_matches_mapped_points() {
        let pts = vec![vec![0.1, 0.7], vec![0.4, -0.2], vec![-0.9, 0.3]];
        let w = vec![0.2, 0.5, 0.3];
        let t = DiagonalAffine::new(vec![1.0, -0.5], vec![-2.0, 0.25]).unwrap();
        let y = TruncatedMomentSequence::from_points(&pts, &w, 4).unwrap();
        let mapped: Vec<_> = pts.iter().map(|p| t.apply(p)).collect();
        let z = TruncatedMomentSequence::from_points(&mapped, &w, 4).unwrap();
        assert!(y.pushforward(&t).unwrap().max_abs_diff(&z).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_then_marginal_recovers_factors() {
        let a = TruncatedMomentSequence::from_points(&[vec![0.5], vec![-0.25]], &[0.5, 0.5], 4).unwrap();
        let b = TruncatedMomentSequence::dirac(&[0.3, 0.1], 4);
        let ab = a.tensor(&b);
        let st = ProductStructure::new(vec![1, 2]);
        assert!(ab.marginal(&st, 0).unwrap().max_abs_diff(&a).unwrap() < 1e-15);
        assert!(ab.marginal(&st, 1).unwrap().max_abs_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn riesz_is_expectation() {
        let y = TruncatedMomentSequence::from_points(&[vec![1.0], vec![3.0]], &[0.5, 0.5], 2).unwrap();
        let g = Polynomial::parse("x1^2 - 2*x1", 1).unwrap();
        assert!((y.riesz(&g).unwrap() - 0.5 * (-1.0 + 3.0)).abs() < 1e-15);
    }
}

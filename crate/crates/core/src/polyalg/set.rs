use serde::{Deserialize, Serialize};

use super::{DiagonalAffine, MultiIndex, Polynomial};
use crate::error::{invalid, Error, Result};

/// Basic closed semialgebraic set `{x : g_j(x) >= 0}`.
///
/// A ball constraint `R^2 - |x - c|^2 >= 0` is always stored as `g_1`,
/// which makes the quadratic module Archimedean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemialgebraicSet {
    dim: usize,
    inequalities: Vec<Polynomial>,
    center: Vec<f64>,
    radius: f64,
}

fn ball_polynomial(center: &[f64], radius: f64) -> Polynomial {
    let n = center.len();
    let mut g = Polynomial::constant(n, radius * radius);
    for (i, &c) in center.iter().enumerate() {
        let d = Polynomial::variable(n, i).add(&Polynomial::constant(n, -c)).expect("same dimension");
        g = g.sub(&d.pow(2)).expect("same dimension");
    }
    g
}

impl SemialgebraicSet {
    /// Set with the given inequalities and a ball of `radius` about the origin.
    pub fn new(dim: usize, inequalities: Vec<Polynomial>, radius: f64) -> Result<Self> {
        Self::with_ball(dim, inequalities, vec![0.0; dim], radius)
    }

    pub fn with_ball(dim: usize, inequalities: Vec<Polynomial>, center: Vec<f64>, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("set dimension must be positive"));
        }
        if center.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: center.len() });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("ball radius must be positive and finite"));
        }
        let ball = ball_polynomial(&center, radius);
        let mut ineqs = vec![ball.clone()];
        for g in inequalities {
            if g.nvars() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.nvars() });
            }
            if g.degree() == 0 {
                return Err(invalid("constant inequality in set description"));
            }
            if g != ball {
                ineqs.push(g);
            }
        }
        Ok(Self { dim, inequalities: ineqs, center, radius })
    }

    /// The box `prod [lo_i, hi_i]`, described by linear side constraints and
    /// the circumscribed ball.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(invalid("box requires lo < hi in every coordinate"));
        }
        let n = lo.len();
        let mut ineqs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let x = Polynomial::variable(n, i);
            ineqs.push(x.add(&Polynomial::constant(n, -lo[i]))?);
            ineqs.push(Polynomial::constant(n, hi[i]).sub(&x)?);
        }
        let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let radius = 0.5 * lo.iter().zip(hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt();
        Self::with_ball(n, ineqs, center, radius)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::with_ball(n, Vec::new(), center, radius)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All inequalities, ball first.
    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    pub fn ball_center(&self) -> &[f64] {
        &self.center
    }

    pub fn ball_radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && self.inequalities.iter().all(|g| g.eval(x) >= -tol)
    }

    /// Map taking the enclosing ball onto the unit ball at the origin.
    pub fn normalization(&self) -> DiagonalAffine {
        DiagonalAffine::normalizing(&self.center, self.radius).expect("radius is positive")
    }

    /// Image of the set under [`Self::normalization`]. Inequalities are
    /// rescaled to unit maximal coefficient.
    pub fn normalized(&self) -> Self {
        let back = self.normalization().inverse();
        let ineqs = self.inequalities[1..]
            .iter()
            .map(|g| {
                let h = g.compose(&back).expect("matching dimension").pruned(1e-15);
                h.scale(1.0 / h.max_abs_coefficient())
            })
            .collect();
        Self::with_ball(self.dim, ineqs, vec![0.0; self.dim], 1.0).expect("valid set")
    }

    /// Same set with further inequalities appended.
    pub fn with_inequalities(&self, extra: Vec<Polynomial>) -> Result<Self> {
        let mut ineqs = self.inequalities[1..].to_vec();
        ineqs.extend(extra);
        Self::with_ball(self.dim, ineqs, self.center.clone(), self.radius)
    }

    /// Localizing half-degrees `ceil(deg g_j / 2)`.
    pub fn localizer_orders(&self) -> Vec<usize> {
        self.inequalities.iter().map(|g| g.degree().div_ceil(2)).collect()
    }
}

/// How the factors of a product set are placed in the product space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductStructure {
    pub factor_dims: Vec<usize>,
}

impl ProductStructure {
    pub fn new(factor_dims: Vec<usize>) -> Self {
        Self { factor_dims }
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().sum()
    }

    pub fn offset(&self, factor: usize) -> usize {
        self.factor_dims[..factor].iter().sum()
    }

    /// Embeds a factor index into the product space.
    pub fn embed(&self, beta: &MultiIndex, factor: usize) -> MultiIndex {
        beta.embed(self.total_dim(), self.offset(factor))
    }
}

/// Ball handling for product sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BallMode {
    /// One ball of radius `sqrt(sum R_i^2)` replaces the factor balls.
    #[default]
    Global,
    /// Every factor keeps its own ball as well.
    PerFactor,
}

/// Cartesian product of sets.
pub fn product_set(factors: &[SemialgebraicSet], mode: BallMode) -> Result<(SemialgebraicSet, ProductStructure)> {
    if factors.is_empty() {
        return Err(invalid("product of zero sets"));
    }
    let structure = ProductStructure::new(factors.iter().map(|s| s.dim).collect());
    if factors.len() == 1 {
        return Ok((factors[0].clone(), structure));
    }
    let total = structure.total_dim();
    let mut ineqs = Vec::new();
    for (k, s) in factors.iter().enumerate() {
        let skip = usize::from(mode == BallMode::Global);
        for g in &s.inequalities[skip..] {
            ineqs.push(g.lift(total, structure.offset(k))?);
        }
    }
    let center: Vec<f64> = factors.iter().flat_map(|s| s.center.iter().copied()).collect();
    let radius = factors.iter().map(|s| s.radius * s.radius).sum::<f64>().sqrt();
    let set = SemialgebraicSet::with_ball(total, ineqs, center, radius)?;
    Ok((set, structure))
}

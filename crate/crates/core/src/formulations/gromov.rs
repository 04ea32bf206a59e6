use serde::{Deserialize, Serialize};

use super::problem::*;
use super::wasserstein::{normalize, plan_space, Normalized};
use crate::error::{invalid, Error, Result};
use crate::moments::TruncatedMomentSequence;
use crate::polyalg::{DiagonalAffine, MultiIndex, Polynomial, SemialgebraicSet};

/// Intra-space cost `c(x, x')` of a Gromov-Wasserstein problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GwCost {
    /// `sum_i |x_i - x'_i|^q` with `q` even.
    Lq(u32),
    /// Any polynomial in `(x, x')`, `2n` variables.
    Polynomial(Polynomial),
}

impl GwCost {
    fn polynomial(&self, n: usize) -> Result<Polynomial> {
        match self {
            GwCost::Lq(q) => {
                if *q == 0 || q % 2 != 0 {
                    return Err(Error::OddPower(*q));
                }
                Ok(super::wasserstein::separable_power_cost(n, *q))
            }
            GwCost::Polynomial(p) => {
                if p.nvars() != 2 * n {
                    return Err(Error::DimensionMismatch { expected: 2 * n, found: p.nvars() });
                }
                Ok(p.clone())
            }
        }
    }
}

/// `(c_X(x, x') - c_Y(y, y'))^p` on ordered variables `(x, y, x', y')`,
/// composed with the back-map of the plan space.
fn gw_integrand(p: u32, cx: &GwCost, cy: &GwCost, nx: usize, ny: usize, back: &DiagonalAffine) -> Result<Polynomial> {
    let m = nx + ny;
    let total = 2 * m;
    let px = cx.polynomial(nx)?;
    let py = cy.polynomial(ny)?;
    // Place (x, x') at offsets (0, m) and (y, y') at offsets (nx, m + nx).
    let place = |poly: &Polynomial, n: usize, first: usize, second: usize| -> Result<Polynomial> {
        Polynomial::from_terms(
            total,
            poly.terms().map(|(a, c)| {
                let mut e = vec![0u32; total];
                e[first..first + n].copy_from_slice(&a.exponents()[..n]);
                e[second..second + n].copy_from_slice(&a.exponents()[n..]);
                (MultiIndex::new(e), c)
            }),
        )
    };
    let d = place(&px, nx, 0, m)?.sub(&place(&py, ny, nx, m + nx)?)?;
    let doubled = DiagonalAffine::concat(&[back, back]);
    d.pow(p).compose(&doubled).map(|q| q.pruned(1e-15))
}

/// Gromov-Wasserstein discrepancy with even exponent `p`.
///
/// The objective is the quadratic functional
/// `L_{y (x) y}((c_X(x,x') - c_Y(y,y'))^p)` of the plan moments. It is
/// handled by [`super::gw_fixed_point`]; the default starting point is
/// the product coupling `mu (x) nu`.
pub fn build_gw_even(
    p: u32,
    cost_x: &GwCost,
    cost_y: &GwCost,
    mu: &TruncatedMomentSequence,
    nu: &TruncatedMomentSequence,
    set_x: &SemialgebraicSet,
    set_y: &SemialgebraicSet,
) -> Result<GeneralizedMomentProblem> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(Error::OddPower(p));
    }
    let a = normalize(mu, set_x)?;
    let b = normalize(nu, set_y)?;
    let (support, st, _, back) = plan_space(&[&a, &b])?;
    let integrand = gw_integrand(p, cost_x, cost_y, a.set.dim(), b.set.dim(), &back)?;
    let objective = QuadraticMomentFunctional::from_doubled_polynomial(0, &integrand, 1.0)?;
    Ok(GeneralizedMomentProblem {
        kind: ProblemKind::GromovWasserstein { p },
        variables: vec![MeasureVariable {
            name: "plan".into(),
            role: VariableRole::Plan,
            mass: MassBound::Implied,
            support,
            structure: st.clone(),
            to_original: back.clone(),
        }],
        objective: Objective::Quadratic(objective),
        constraints: vec![
            MomentConstraint::Sequence {
                dim: a.set.dim(),
                terms: vec![SequenceTerm { var: 0, coef: 1.0, factor: Some(0) }],
                target: Some(a.moments.clone()),
            },
            MomentConstraint::Sequence {
                dim: b.set.dim(),
                terms: vec![SequenceTerm { var: 0, coef: 1.0, factor: Some(1) }],
                target: Some(b.moments.clone()),
            },
        ],
        readouts: vec![Readout {
            name: "plan".into(),
            dim: st.total_dim(),
            terms: vec![SequenceTerm { var: 0, coef: 1.0, factor: None }],
            to_original: back,
        }],
        initial: vec![Some(a.moments.tensor(&b.moments))],
    })
}

/// Gromov-Wasserstein barycenter with `p = q = 2`:
/// `min_nu sum_i lambda_i GW_2^2(nu, mu_i)` with `nu` on `set_x`.
///
/// Variables are the barycenter (index 0) and one plan per input on
/// `X x Y_i`, whose first marginal equals the barycenter. The starting
/// barycenter is the input with the largest weight, carried into the
/// normalized coordinates of `X`.
pub fn build_gw_barycenter(
    measures: &[TruncatedMomentSequence],
    weights: &[f64],
    set_x: &SemialgebraicSet,
    sets_y: &[SemialgebraicSet],
) -> Result<GeneralizedMomentProblem> {
    if measures.is_empty() || measures.len() != weights.len() || measures.len() != sets_y.len() {
        return Err(invalid("need one weight and one set per measure"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("barycenter weights must be nonnegative and sum to 1"));
    }
    let norm: Vec<Normalized> = measures.iter().zip(sets_y).map(|(m, s)| normalize(m, s)).collect::<Result<_>>()?;
    let lead = (0..weights.len()).fold(0, |b, i| if weights[i] > weights[b] { i } else { b });
    if norm[lead].set.dim() != set_x.dim() {
        return Err(Error::DimensionMismatch { expected: set_x.dim(), found: norm[lead].set.dim() });
    }
    let xfwd = set_x.normalization();
    let x_norm = Normalized { set: set_x.normalized(), forward: xfwd.clone(), moments: norm[lead].moments.clone() };
    let nx = set_x.dim();
    let mut variables = vec![MeasureVariable {
        name: "barycenter".into(),
        role: VariableRole::Barycenter,
        mass: MassBound::Unit,
        support: x_norm.set.clone(),
        structure: crate::polyalg::ProductStructure::new(vec![nx]),
        to_original: xfwd.inverse(),
    }];
    let mut initial = vec![Some(x_norm.moments.clone())];
    let mut quad = QuadraticMomentFunctional::default();
    let mut constraints = Vec::new();
    for (i, b) in norm.iter().enumerate() {
        let (support, st, _, back) = plan_space(&[&x_norm, b])?;
        let var = variables.len();
        let integrand = gw_integrand(2, &GwCost::Lq(2), &GwCost::Lq(2), nx, b.set.dim(), &back)?;
        quad.terms.extend(QuadraticMomentFunctional::from_doubled_polynomial(var, &integrand, weights[i])?.terms);
        variables.push(MeasureVariable {
            name: format!("plan{}", i + 1),
            role: VariableRole::Plan,
            mass: MassBound::Implied,
            support,
            structure: st,
            to_original: back,
        });
        initial.push(Some(x_norm.moments.tensor(&b.moments)));
        constraints.push(MomentConstraint::Sequence {
            dim: b.set.dim(),
            terms: vec![SequenceTerm { var, coef: 1.0, factor: Some(1) }],
            target: Some(b.moments.clone()),
        });
        constraints.push(MomentConstraint::Sequence {
            dim: nx,
            terms: vec![
                SequenceTerm { var, coef: 1.0, factor: Some(0) },
                SequenceTerm { var: 0, coef: -1.0, factor: None },
            ],
            target: None,
        });
    }
    quad.terms.retain(|t| t.coef != 0.0);
    Ok(GeneralizedMomentProblem {
        kind: ProblemKind::GromovWassersteinBarycenter,
        variables,
        objective: Objective::Quadratic(quad),
        constraints,
        readouts: vec![Readout {
            name: "barycenter".into(),
            dim: nx,
            terms: vec![SequenceTerm { var: 0, coef: 1.0, factor: None }],
            to_original: xfwd.inverse(),
        }],
        initial,
    })
}

/// Linear functional `sum_k a_k prev[v_k][gamma^R_k] y_{v_k, gamma^L_k}`
/// obtained by freezing the right factor of every quadratic term.
pub fn gw_linearize(
    problem: &GeneralizedMomentProblem,
    prev: &[TruncatedMomentSequence],
) -> Result<LinearMomentFunctional> {
    let Objective::Quadratic(q) = &problem.objective else {
        return Err(invalid("linearization needs a quadratic objective"));
    };
    if prev.len() != problem.variables.len() {
        return Err(Error::DimensionMismatch { expected: problem.variables.len(), found: prev.len() });
    }
    let mut f = LinearMomentFunctional::default();
    for t in &q.terms {
        f.terms.push(LinearTerm { var: t.var, alpha: t.left.clone(), coef: t.coef * prev[t.var].get(&t.right)? });
    }
    Ok(f.simplified())
}

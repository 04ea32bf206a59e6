use super::problem::*;
use crate::error::{invalid, Error, Result};
use crate::moments::TruncatedMomentSequence;
use crate::polyalg::{product_set, BallMode, DiagonalAffine, Polynomial, ProductStructure, SemialgebraicSet};

/// A marginal brought to normalized coordinates.
pub(crate) struct Normalized {
    pub set: SemialgebraicSet,
    pub forward: DiagonalAffine,
    pub moments: TruncatedMomentSequence,
}

pub(crate) fn normalize(m: &TruncatedMomentSequence, set: &SemialgebraicSet) -> Result<Normalized> {
    if m.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: m.dim() });
    }
    if !m.is_probability(1e-9) {
        return Err(invalid(format!("marginal has mass {} instead of 1", m.mass())));
    }
    let forward = set.normalization();
    Ok(Normalized { set: set.normalized(), moments: m.pushforward(&forward)?, forward })
}

/// Support, structure and back-map of a plan on a product of normalized sets.
pub(crate) fn plan_space(
    parts: &[&Normalized],
) -> Result<(SemialgebraicSet, ProductStructure, DiagonalAffine, DiagonalAffine)> {
    let sets: Vec<SemialgebraicSet> = parts.iter().map(|p| p.set.clone()).collect();
    let (set, st) = product_set(&sets, BallMode::Global)?;
    let fwd: Vec<&DiagonalAffine> = parts.iter().map(|p| &p.forward).collect();
    let forward = DiagonalAffine::concat(&fwd);
    let back = forward.inverse();
    Ok((set, st, forward, back))
}

/// `sum_i (x_i - y_i)^p` on `R^n x R^n`.
pub fn separable_power_cost(n: usize, p: u32) -> Polynomial {
    let mut c = Polynomial::zero(2 * n);
    for i in 0..n {
        let d = Polynomial::variable(2 * n, i).sub(&Polynomial::variable(2 * n, n + i)).expect("same dimension");
        c = c.add(&d.pow(p)).expect("same dimension");
    }
    c
}

fn plan_variable(
    name: &str,
    support: SemialgebraicSet,
    structure: ProductStructure,
    back: DiagonalAffine,
) -> MeasureVariable {
    MeasureVariable {
        name: name.to_string(),
        role: VariableRole::Plan,
        mass: MassBound::Implied,
        support,
        structure,
        to_original: back,
    }
}

fn marginal_constraint(terms: Vec<SequenceTerm>, target: &Normalized) -> MomentConstraint {
    MomentConstraint::Sequence { dim: target.moments.dim(), terms, target: Some(target.moments.clone()) }
}

fn on_factor(vars: &[usize], factor: usize, coef: f64) -> Vec<SequenceTerm> {
    vars.iter().map(|&var| SequenceTerm { var, coef, factor: Some(factor) }).collect()
}

/// Multi-marginal transport with polynomial cost on the product of `sets`.
pub fn build_multimarginal(
    cost: &Polynomial,
    marginals: &[TruncatedMomentSequence],
    sets: &[SemialgebraicSet],
) -> Result<GeneralizedMomentProblem> {
    if marginals.len() != sets.len() || marginals.is_empty() {
        return Err(invalid("need one set per marginal and at least one marginal"));
    }
    let norm: Vec<Normalized> = marginals.iter().zip(sets).map(|(m, s)| normalize(m, s)).collect::<Result<_>>()?;
    let parts: Vec<&Normalized> = norm.iter().collect();
    let (support, st, _, back) = plan_space(&parts)?;
    if cost.nvars() != st.total_dim() {
        return Err(Error::DimensionMismatch { expected: st.total_dim(), found: cost.nvars() });
    }
    let c = cost.compose(&back)?;
    let constraints = norm.iter().enumerate().map(|(i, n)| marginal_constraint(on_factor(&[0], i, 1.0), n)).collect();
    Ok(GeneralizedMomentProblem {
        kind: ProblemKind::Multimarginal,
        readouts: vec![Readout {
            name: "plan".into(),
            dim: st.total_dim(),
            terms: on_vars(&[0], None),
            to_original: back.clone(),
        }],
        variables: vec![plan_variable("plan", support, st, back)],
        objective: Objective::Linear(LinearMomentFunctional::from_polynomial(0, &c)),
        constraints,
        initial: vec![None],
    })
}

fn on_vars(vars: &[usize], factor: Option<usize>) -> Vec<SequenceTerm> {
    vars.iter().map(|&var| SequenceTerm { var, coef: 1.0, factor }).collect()
}

/// `W_p^p` for even `p` with cost `sum_i (x_i - y_i)^p`.
pub fn build_wp_even(
    p: u32,
    mu: &TruncatedMomentSequence,
    nu: &TruncatedMomentSequence,
    set: &SemialgebraicSet,
) -> Result<GeneralizedMomentProblem> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(Error::OddPower(p));
    }
    let mut g = build_multimarginal(
        &separable_power_cost(set.dim(), p),
        &[mu.clone(), nu.clone()],
        &[set.clone(), set.clone()],
    )?;
    g.kind = ProblemKind::Wasserstein { p };
    Ok(g)
}

/// Plan pieces `A_i^{+-} = {+-(x_i - y_i) >= 0}` for each coordinate.
fn split_pieces(
    prefix: &str,
    support: &SemialgebraicSet,
    st: &ProductStructure,
    back: &DiagonalAffine,
    n: usize,
) -> Result<Vec<(MeasureVariable, usize, f64)>> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let h = Polynomial::variable(2 * n, i).sub(&Polynomial::variable(2 * n, n + i))?.scale(s);
            out.push((
                MeasureVariable {
                    name: format!("{prefix}{}{}", i + 1, if s > 0.0 { "+" } else { "-" }),
                    role: VariableRole::SplitPiece,
                    mass: MassBound::AtMostUnit,
                    support: support.with_inequalities(vec![h])?,
                    structure: st.clone(),
                    to_original: back.clone(),
                },
                i,
                s,
            ));
        }
    }
    Ok(out)
}

/// Appends the split pieces of one plan: objective terms, and equality of
/// the piece sums across coordinates. Returns the variables of the first
/// coordinate, whose sum represents the plan.
fn add_split_plan(
    g: &mut GeneralizedMomentProblem,
    objective: &mut LinearMomentFunctional,
    prefix: &str,
    parts: &[&Normalized],
    p: u32,
    weight: f64,
) -> Result<Vec<usize>> {
    let n = parts[0].set.dim();
    let (support, st, _, back) = plan_space(parts)?;
    let base = g.variables.len();
    let pieces = split_pieces(prefix, &support, &st, &back, n)?;
    let cost_1d: Vec<Polynomial> = (0..n)
        .map(|i| {
            let d = Polynomial::variable(2 * n, i).sub(&Polynomial::variable(2 * n, n + i)).expect("same dimension");
            d.pow(p).compose(&back).expect("matching dimension")
        })
        .collect();
    for (k, (v, i, s)) in pieces.into_iter().enumerate() {
        objective.add_polynomial(base + k, &cost_1d[i].scale(s * weight));
        g.variables.push(v);
        g.initial.push(None);
    }
    let first = vec![base, base + 1];
    for i in 1..n {
        let mut terms = on_vars(&first, None);
        terms.extend([base + 2 * i, base + 2 * i + 1].map(|var| SequenceTerm { var, coef: -1.0, factor: None }));
        g.constraints.push(MomentConstraint::Sequence { dim: 2 * n, terms, target: None });
    }
    g.readouts.push(Readout {
        name: prefix.trim_end_matches('_').to_string(),
        dim: 2 * n,
        terms: on_vars(&first, None),
        to_original: back,
    });
    Ok(first)
}

fn empty_problem(kind: ProblemKind) -> GeneralizedMomentProblem {
    GeneralizedMomentProblem {
        kind,
        variables: Vec::new(),
        objective: Objective::Linear(LinearMomentFunctional::default()),
        constraints: Vec::new(),
        readouts: Vec::new(),
        initial: Vec::new(),
    }
}

/// `W_p^p` for odd `p` with cost `sum_i |x_i - y_i|^p`, using `2n` split
/// measures so that every piece carries a polynomial cost.
pub fn build_wp_odd(
    p: u32,
    mu: &TruncatedMomentSequence,
    nu: &TruncatedMomentSequence,
    set: &SemialgebraicSet,
) -> Result<GeneralizedMomentProblem> {
    if p.is_multiple_of(2) {
        return Err(Error::EvenPower(p));
    }
    let a = normalize(mu, set)?;
    let b = normalize(nu, set)?;
    let mut g = empty_problem(ProblemKind::Wasserstein { p });
    let mut obj = LinearMomentFunctional::default();
    let first = add_split_plan(&mut g, &mut obj, "plan_", &[&a, &b], p, 1.0)?;
    g.constraints.push(marginal_constraint(on_factor(&first, 0, 1.0), &a));
    g.constraints.push(marginal_constraint(on_factor(&first, 1, 1.0), &b));
    g.objective = Objective::Linear(obj.simplified());
    Ok(g)
}

/// One piece of a piecewise polynomial cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CostPiece {
    pub cost: Polynomial,
    /// Extra inequalities cutting the piece out of the product space.
    pub region: Vec<Polynomial>,
}

/// Two-marginal transport with a cost that is polynomial on each piece of
/// a cover of `X x Y`; one measure per piece, marginals on their sum.
pub fn build_piecewise(
    pieces: &[CostPiece],
    marginals: &[TruncatedMomentSequence],
    sets: &[SemialgebraicSet],
) -> Result<GeneralizedMomentProblem> {
    if pieces.is_empty() || marginals.len() != sets.len() || marginals.is_empty() {
        return Err(invalid("need pieces and one set per marginal"));
    }
    let norm: Vec<Normalized> = marginals.iter().zip(sets).map(|(m, s)| normalize(m, s)).collect::<Result<_>>()?;
    let parts: Vec<&Normalized> = norm.iter().collect();
    let (support, st, _, back) = plan_space(&parts)?;
    let mut g = empty_problem(ProblemKind::Piecewise);
    let mut obj = LinearMomentFunctional::default();
    for (k, piece) in pieces.iter().enumerate() {
        if piece.cost.nvars() != st.total_dim() {
            return Err(Error::DimensionMismatch { expected: st.total_dim(), found: piece.cost.nvars() });
        }
        let region = piece.region.iter().map(|h| h.compose(&back)).collect::<Result<Vec<_>>>()?;
        g.variables.push(MeasureVariable {
            name: format!("piece{}", k + 1),
            role: VariableRole::SplitPiece,
            mass: MassBound::AtMostUnit,
            support: support.with_inequalities(region)?,
            structure: st.clone(),
            to_original: back.clone(),
        });
        g.initial.push(None);
        obj.add_polynomial(k, &piece.cost.compose(&back)?);
    }
    let all: Vec<usize> = (0..pieces.len()).collect();
    for (i, n) in norm.iter().enumerate() {
        g.constraints.push(marginal_constraint(on_factor(&all, i, 1.0), n));
    }
    g.readouts.push(Readout {
        name: "plan".into(),
        dim: st.total_dim(),
        terms: on_vars(&all, None),
        to_original: back,
    });
    g.objective = Objective::Linear(obj.simplified());
    Ok(g)
}

/// Wasserstein barycenter `min_nu sum_i lambda_i W_p^p(nu, mu_i)` with all
/// measures on `set`. One plan per input; the plans share their first
/// marginal, which is the barycenter (readout `"barycenter"`).
pub fn build_barycenter_wp(
    p: u32,
    measures: &[TruncatedMomentSequence],
    weights: &[f64],
    set: &SemialgebraicSet,
) -> Result<GeneralizedMomentProblem> {
    if p == 0 {
        return Err(invalid("p must be positive"));
    }
    if measures.len() != weights.len() || measures.is_empty() {
        return Err(invalid("need one weight per measure"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("barycenter weights must be nonnegative and sum to 1"));
    }
    let norm: Vec<Normalized> = measures.iter().map(|m| normalize(m, set)).collect::<Result<_>>()?;
    let n = set.dim();
    let mut g = empty_problem(ProblemKind::WassersteinBarycenter { p });
    let mut obj = LinearMomentFunctional::default();
    // The first marginal is free; only its domain is needed.
    let free =
        Normalized { set: norm[0].set.clone(), forward: norm[0].forward.clone(), moments: norm[0].moments.clone() };
    let mut plans: Vec<Vec<usize>> = Vec::new();
    for (i, target) in norm.iter().enumerate() {
        let first = if p.is_multiple_of(2) {
            let (support, st, _, back) = plan_space(&[&free, target])?;
            let var = g.variables.len();
            g.variables.push(plan_variable(&format!("plan{}", i + 1), support, st, back.clone()));
            g.initial.push(None);
            obj.add_polynomial(var, &separable_power_cost(n, p).compose(&back)?.scale(weights[i]));
            vec![var]
        } else {
            add_split_plan(&mut g, &mut obj, &format!("plan{}_", i + 1), &[&free, target], p, weights[i])?
        };
        g.constraints.push(marginal_constraint(on_factor(&first, 1, 1.0), target));
        plans.push(first);
    }
    for w in plans.windows(2) {
        let mut terms = on_factor(&w[0], 0, 1.0);
        terms.extend(on_factor(&w[1], 0, -1.0));
        g.constraints.push(MomentConstraint::Sequence { dim: n, terms, target: None });
    }
    g.readouts.push(Readout {
        name: "barycenter".into(),
        dim: n,
        terms: on_factor(&plans[0], 0, 1.0),
        to_original: norm[0].forward.inverse(),
    });
    g.objective = Objective::Linear(obj.simplified());
    Ok(g)
}

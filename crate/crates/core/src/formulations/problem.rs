use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::moments::TruncatedMomentSequence;
use crate::polyalg::{enumerate_indices, DiagonalAffine, MultiIndex, Polynomial, ProductStructure, SemialgebraicSet};

/// What a measure variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableRole {
    Plan,
    /// Restriction of a plan to one piece of a partition of its support.
    SplitPiece,
    Barycenter,
}

/// How the total mass of a variable is controlled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassBound {
    /// `y_0 = 1`.
    Unit,
    /// `y_0 <= 1`.
    AtMostUnit,
    /// Fixed by a marginal constraint.
    Implied,
}

/// Unknown measure of a generalized moment problem.
///
/// The support is stored in normalized coordinates (inside the unit ball
/// of every factor); `to_original` maps them back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureVariable {
    pub name: String,
    pub role: VariableRole,
    pub mass: MassBound,
    pub support: SemialgebraicSet,
    pub structure: ProductStructure,
    pub to_original: DiagonalAffine,
}

impl MeasureVariable {
    pub fn dim(&self) -> usize {
        self.support.dim()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub var: usize,
    pub alpha: MultiIndex,
    pub coef: f64,
}

/// `sum_k c_k L_{y_{v_k}}(x^{alpha_k})`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearMomentFunctional {
    pub terms: Vec<LinearTerm>,
}

impl LinearMomentFunctional {
    pub fn from_polynomial(var: usize, p: &Polynomial) -> Self {
        Self { terms: p.terms().map(|(a, c)| LinearTerm { var, alpha: a.clone(), coef: c }).collect() }
    }

    pub fn add_polynomial(&mut self, var: usize, p: &Polynomial) {
        self.terms.extend(Self::from_polynomial(var, p).terms);
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.alpha.degree()).max().unwrap_or(0)
    }

    /// Merges repeated `(var, alpha)` pairs and drops zeros.
    pub fn simplified(&self) -> Self {
        let mut map: BTreeMap<(usize, MultiIndex), f64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.var, t.alpha.clone())).or_insert(0.0) += t.coef;
        }
        Self {
            terms: map
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((var, alpha), coef)| LinearTerm { var, alpha, coef })
                .collect(),
        }
    }

    pub fn evaluate(&self, seqs: &[TruncatedMomentSequence]) -> Result<f64> {
        self.terms.iter().map(|t| Ok(t.coef * seqs[t.var].get(&t.alpha)?)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub var: usize,
    pub left: MultiIndex,
    pub right: MultiIndex,
    pub coef: f64,
}

/// `sum_k a_k y_{v_k, gamma^L_k} y_{v_k, gamma^R_k}`, i.e. the Riesz
/// functional of `y (x) y` applied to a polynomial in doubled variables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMomentFunctional {
    pub terms: Vec<QuadraticTerm>,
}

impl QuadraticMomentFunctional {
    /// Splits `p(z, z')` over `2 n` variables into left and right halves.
    pub fn from_doubled_polynomial(var: usize, p: &Polynomial, weight: f64) -> Result<Self> {
        if !p.nvars().is_multiple_of(2) {
            return Err(invalid("doubled polynomial needs an even number of variables"));
        }
        let n = p.nvars() / 2;
        Ok(Self {
            terms: p
                .terms()
                .map(|(a, c)| QuadraticTerm { var, left: a.slice(0, n), right: a.slice(n, n), coef: weight * c })
                .collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.left.degree().max(t.right.degree())).max().unwrap_or(0)
    }

    /// `sum a_k cur[gamma^L] prev[gamma^R]`.
    pub fn evaluate_pair(&self, cur: &[TruncatedMomentSequence], prev: &[TruncatedMomentSequence]) -> Result<f64> {
        self.terms.iter().map(|t| Ok(t.coef * cur[t.var].get(&t.left)? * prev[t.var].get(&t.right)?)).sum()
    }

    pub fn evaluate(&self, seqs: &[TruncatedMomentSequence]) -> Result<f64> {
        self.evaluate_pair(seqs, seqs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    Linear(LinearMomentFunctional),
    Quadratic(QuadraticMomentFunctional),
}

impl Objective {
    pub fn degree(&self) -> usize {
        match self {
            Objective::Linear(f) => f.degree(),
            Objective::Quadratic(q) => q.degree(),
        }
    }
}

/// Reads the moments of `var` at indices `beta` placed in factor `factor`
/// of its product structure, or directly when `factor` is `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTerm {
    pub var: usize,
    pub coef: f64,
    pub factor: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MomentConstraint {
    /// A single linear equation on moments; kept at order `r` only when its
    /// degree is at most `2r`.
    Linear { functional: LinearMomentFunctional, rhs: f64 },
    /// `sum_t c_t y_{v_t}[embed_t(beta)] = target[beta]` (zero without
    /// target) for every `|beta| <= 2r` in dimension `dim`.
    Sequence { dim: usize, terms: Vec<SequenceTerm>, target: Option<TruncatedMomentSequence> },
}

/// Which problem a builder produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ProblemKind {
    Multimarginal,
    Piecewise,
    Wasserstein { p: u32 },
    WassersteinBarycenter { p: u32 },
    GromovWasserstein { p: u32 },
    GromovWassersteinBarycenter,
}

/// Linear combination of (marginals of) variables exposed as a derived
/// sequence, e.g. a plan assembled from split pieces or a barycenter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub name: String,
    pub dim: usize,
    pub terms: Vec<SequenceTerm>,
    pub to_original: DiagonalAffine,
}

/// Measure-valued optimization problem over truncated moment sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedMomentProblem {
    pub kind: ProblemKind,
    pub variables: Vec<MeasureVariable>,
    pub objective: Objective,
    pub constraints: Vec<MomentConstraint>,
    pub readouts: Vec<Readout>,
    /// Starting sequences for fixed-point iterations, per variable.
    pub initial: Vec<Option<TruncatedMomentSequence>>,
}

impl GeneralizedMomentProblem {
    /// Moment index of `var` addressed by `beta` through a sequence term.
    pub fn term_index(&self, t: &SequenceTerm, beta: &MultiIndex) -> MultiIndex {
        let v = &self.variables[t.var];
        match t.factor {
            Some(f) => v.structure.embed(beta, f),
            None => beta.clone(),
        }
    }

    /// Same problem with a replacement objective.
    pub fn with_objective(&self, objective: Objective) -> Self {
        let mut p = self.clone();
        p.objective = objective;
        p
    }

    pub fn objective_value(&self, seqs: &[TruncatedMomentSequence]) -> Result<f64> {
        match &self.objective {
            Objective::Linear(f) => f.evaluate(seqs),
            Objective::Quadratic(q) => q.evaluate(seqs),
        }
    }

    /// Largest violation of the constraints up to degree `order`.
    pub fn constraint_residual(&self, seqs: &[TruncatedMomentSequence], order: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            match c {
                MomentConstraint::Linear { functional, rhs } => {
                    if functional.degree() <= order {
                        worst = worst.max((functional.evaluate(seqs)? - rhs).abs());
                    }
                }
                MomentConstraint::Sequence { dim, terms, target } => {
                    for beta in enumerate_indices(*dim, order) {
                        let mut s = 0.0;
                        for t in terms {
                            s += t.coef * seqs[t.var].get(&self.term_index(t, &beta))?;
                        }
                        let b = match target {
                            Some(m) => m.get(&beta)?,
                            None => 0.0,
                        };
                        worst = worst.max((s - b).abs());
                    }
                }
            }
        }
        for (v, y) in self.variables.iter().zip(seqs) {
            match v.mass {
                MassBound::Unit => worst = worst.max((y.mass() - 1.0).abs()),
                MassBound::AtMostUnit => worst = worst.max(y.mass() - 1.0),
                MassBound::Implied => {}
            }
        }
        Ok(worst)
    }

    pub fn readout_names(&self) -> Vec<&str> {
        self.readouts.iter().map(|r| r.name.as_str()).collect()
    }

    /// Evaluates a readout in normalized coordinates.
    pub fn readout_normalized(&self, name: &str, seqs: &[TruncatedMomentSequence]) -> Result<TruncatedMomentSequence> {
        let r = self
            .readouts
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| invalid(format!("no readout named '{name}'")))?;
        let order = r.terms.iter().map(|t| seqs[t.var].order()).min().unwrap_or(0);
        let mut out = Vec::new();
        for beta in enumerate_indices(r.dim, order) {
            let mut s = 0.0;
            for t in &r.terms {
                s += t.coef * seqs[t.var].get(&self.term_index(t, &beta))?;
            }
            out.push(s);
        }
        TruncatedMomentSequence::from_values(r.dim, order, out)
    }

    /// Evaluates a readout and maps it back to original coordinates.
    pub fn readout(&self, name: &str, seqs: &[TruncatedMomentSequence]) -> Result<TruncatedMomentSequence> {
        let r = self
            .readouts
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| invalid(format!("no readout named '{name}'")))?;
        self.readout_normalized(name, seqs)?.pushforward(&r.to_original)
    }

    /// Moments of variable `var` in original coordinates.
    pub fn original_sequence(&self, var: usize, y: &TruncatedMomentSequence) -> Result<TruncatedMomentSequence> {
        let v = self.variables.get(var).ok_or_else(|| invalid(format!("no variable {var}")))?;
        if v.dim() != y.dim() {
            return Err(Error::DimensionMismatch { expected: v.dim(), found: y.dim() });
        }
        y.pushforward(&v.to_original)
    }
}

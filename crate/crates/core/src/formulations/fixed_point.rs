use serde::{Deserialize, Serialize};

use super::gromov::gw_linearize;
use super::problem::{GeneralizedMomentProblem, Objective};
use crate::error::{invalid, Error, Result};
use crate::moments::TruncatedMomentSequence;
use crate::relaxation::{minimum_order, solve_order, RelaxationOptions, RelaxationResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Stop when `|q_k - q_{k-1}| <= tol * max(1, |q_k|)`, with `q_0` the
    /// objective at the starting point.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight `theta` in `y^k = (1 - theta) y_new + theta y^{k-1}`; 0 takes
    /// the new solution as is. Convex combinations stay feasible.
    #[serde(default)]
    pub damping: f64,
    pub relaxation: RelaxationOptions,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 50, damping: 0.0, relaxation: RelaxationOptions::default() }
    }
}

/// One fixed-point iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Optimal value of the linearized relaxation, `L(y^k (x) y^{k-1})`.
    pub linearized: f64,
    /// Quadratic objective at the new iterate, `L(y^k (x) y^k)`.
    pub quadratic: f64,
    /// Relative change of `quadratic` from the previous iteration, or from
    /// the starting point for the first one.
    pub relative_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOutcome {
    pub order: usize,
    pub converged: bool,
    /// Objective at the starting point, when it can be evaluated.
    pub initial_value: Option<f64>,
    pub trace: Vec<TraceEntry>,
    /// Iterate with the smallest quadratic value.
    pub best: Vec<TruncatedMomentSequence>,
    pub best_value: f64,
    pub best_iteration: usize,
    pub last: RelaxationResult,
    /// Set when a solve failed after the first iteration; names the iteration.
    pub stopped_early: Option<String>,
}

/// Relative change used by the stopping rule.
pub fn relative_change(current: f64, previous: f64) -> f64 {
    (current - previous).abs() / current.abs().max(1.0)
}

fn blend(
    new: &[TruncatedMomentSequence],
    old: &[TruncatedMomentSequence],
    theta: f64,
) -> Result<Vec<TruncatedMomentSequence>> {
    new.iter()
        .zip(old)
        .map(|(a, b)| {
            let b = b.truncate(a.order())?;
            let v = a.values().iter().zip(b.values()).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
            TruncatedMomentSequence::from_values(a.dim(), a.order(), v)
        })
        .collect()
}

/// Fixed-point iteration for problems with a quadratic objective: each step
/// solves the order-`r` relaxation of the objective linearized at the
/// previous iterate. `init` defaults to the problem's starting sequences
/// (the product coupling for Gromov-Wasserstein).
pub fn gw_fixed_point(
    problem: &GeneralizedMomentProblem,
    r: usize,
    init: Option<&[TruncatedMomentSequence]>,
    options: &FixedPointOptions,
) -> Result<FixedPointOutcome> {
    let Objective::Quadratic(q) = &problem.objective else {
        return Err(invalid("fixed-point iteration needs a quadratic objective"));
    };
    let rmin = minimum_order(problem);
    if r < rmin {
        return Err(Error::OrderTooLow { order: r, minimum: rmin });
    }
    if options.max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    if !(0.0..1.0).contains(&options.damping) {
        return Err(invalid("damping must lie in [0, 1)"));
    }
    let mut prev: Vec<TruncatedMomentSequence> = match init {
        Some(s) => s.to_vec(),
        None => problem
            .initial
            .iter()
            .zip(&problem.variables)
            .map(|(s, v)| s.clone().unwrap_or_else(|| TruncatedMomentSequence::zeros(v.dim(), 0)))
            .collect(),
    };
    if prev.len() != problem.variables.len() {
        return Err(Error::DimensionMismatch { expected: problem.variables.len(), found: prev.len() });
    }
    let initial_value = q.evaluate(&prev).ok();
    let mut previous = initial_value;
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best: Option<(f64, usize, Vec<TruncatedMomentSequence>)> = None;
    let mut last: Option<RelaxationResult> = None;
    let mut converged = false;
    let mut stopped_early = None;
    for k in 1..=options.max_iter {
        let lin = gw_linearize(problem, &prev)?;
        let sub = problem.with_objective(Objective::Linear(lin));
        let mut res = match solve_order(&sub, r, &options.relaxation) {
            Ok(res) => res,
            Err(e) if last.is_some() => {
                stopped_early = Some(format!("iteration {k}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        if options.damping > 0.0 && k > 1 {
            res.sequences = blend(&res.sequences, &prev, options.damping)?;
        }
        let quadratic = q.evaluate(&res.sequences)?;
        let change = previous.map(|p| relative_change(quadratic, p));
        previous = Some(quadratic);
        trace.push(TraceEntry { iteration: k, linearized: res.rho, quadratic, relative_change: change });
        if best.as_ref().is_none_or(|b| quadratic < b.0) {
            best = Some((quadratic, k, res.sequences.clone()));
        }
        prev = res.sequences.clone();
        last = Some(res);
        if change.is_some_and(|c| c <= options.tol) {
            converged = true;
            break;
        }
    }
    let (best_value, best_iteration, best) = best.expect("at least one iteration");
    Ok(FixedPointOutcome {
        order: r,
        converged,
        initial_value,
        trace,
        best,
        best_value,
        best_iteration,
        last: last.expect("at least one iteration"),
        stopped_early,
    })
}

//! Order-`r` semidefinite relaxations of generalized moment problems.
//!
//! Each measure variable contributes its moments up to degree `2r` as
//! scalar unknowns, a moment matrix block, and one localizing block per
//! support inequality (Putinar form; products of inequalities are added
//! in Schmüdgen form).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conic::{solve, BlockBuilder, ConeKind, ConicProgram, SolveReport, SolveStatus, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::formulations::{GeneralizedMomentProblem, MassBound, MomentConstraint, Objective};
use crate::moments::{localizing_matrix, TruncatedMomentSequence};
use crate::polyalg::{enumerate_indices, monomial_count, Polynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct RelaxationOptions {
    pub solver: SolverOptions,
    /// Add localizing blocks for products of inequalities.
    pub schmudgen: bool,
}

/// Position of one measure variable inside the scalar decision vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub offset: usize,
    pub dim: usize,
    pub degree: usize,
    pub len: usize,
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub order: usize,
    pub program: ConicProgram,
    pub layout: Vec<VariableLayout>,
}

impl Assembly {
    pub fn sequences(&self, y: &[f64]) -> Vec<TruncatedMomentSequence> {
        self.layout
            .iter()
            .map(|l| {
                TruncatedMomentSequence::from_values(l.dim, l.degree, y[l.offset..l.offset + l.len].to_vec())
                    .expect("layout matches")
            })
            .collect()
    }
}

/// Smallest admissible order
/// `r* = max(ceil(deg f / 2), max_j ceil(deg g_j / 2))`.
pub fn minimum_order(problem: &GeneralizedMomentProblem) -> usize {
    let mut r = problem.objective.degree().div_ceil(2).max(1);
    for v in &problem.variables {
        for d in v.support.localizer_orders() {
            r = r.max(d);
        }
    }
    r
}

/// Localizing polynomials of a support: the inequalities themselves, and
/// with `schmudgen` every product of two or more whose degree fits.
fn localizers(ineqs: &[Polynomial], r: usize, schmudgen: bool) -> Result<Vec<(String, Polynomial)>> {
    let mut out: Vec<(String, Polynomial)> =
        ineqs.iter().enumerate().map(|(j, g)| (format!("g{}", j + 1), g.clone())).collect();
    if schmudgen {
        if ineqs.len() > 16 {
            return Err(invalid("too many inequalities for products of subsets"));
        }
        for mask in 1u32..(1 << ineqs.len()) {
            if mask.count_ones() < 2 {
                continue;
            }
            let picked: Vec<usize> = (0..ineqs.len()).filter(|j| mask & (1 << j) != 0).collect();
            let deg: usize = picked.iter().map(|&j| ineqs[j].degree()).sum();
            if deg > 2 * r {
                continue;
            }
            let mut g = Polynomial::constant(ineqs[0].nvars(), 1.0);
            for &j in &picked {
                g = g.mul(&ineqs[j])?;
            }
            let name = picked.iter().map(|j| format!("g{}", j + 1)).collect::<Vec<_>>().join("*");
            out.push((name, g));
        }
    }
    Ok(out)
}

/// Builds the order-`r` relaxation. The objective must be linear.
pub fn assemble(problem: &GeneralizedMomentProblem, r: usize, options: &RelaxationOptions) -> Result<Assembly> {
    let rmin = minimum_order(problem);
    if r < rmin {
        return Err(Error::OrderTooLow { order: r, minimum: rmin });
    }
    let Objective::Linear(objective) = &problem.objective else {
        return Err(Error::QuadraticObjective);
    };
    let deg = 2 * r;
    let mut layout = Vec::with_capacity(problem.variables.len());
    let mut offset = 0;
    for v in &problem.variables {
        let len = monomial_count(v.dim(), deg);
        layout.push(VariableLayout { offset, dim: v.dim(), degree: deg, len });
        offset += len;
    }
    let mut program = ConicProgram::new(offset);
    for (k, v) in problem.variables.iter().enumerate() {
        let off = layout[k].offset;
        let mut locs = vec![("moment".to_string(), Polynomial::constant(v.dim(), 1.0))];
        locs.extend(localizers(v.support.inequalities(), r, options.schmudgen)?);
        for (name, g) in locs {
            let d = g.degree().div_ceil(2);
            if d > r {
                continue;
            }
            let basis = enumerate_indices(v.dim(), r - d);
            let mut b = BlockBuilder::new(ConeKind::Psd, basis.len(), format!("{}:{}", v.name, name));
            let terms: Vec<_> = g.terms().map(|(a, c)| (a.clone(), c)).collect();
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    let ab = basis[i].add(&basis[j]);
                    for (gam, c) in &terms {
                        b.add(off + ab.add(gam).grlex_rank(), i, j, *c);
                    }
                }
            }
            program.add_block(b.build());
        }
        match v.mass {
            MassBound::Unit => program.add_equality(vec![(off, 1.0)], 1.0),
            MassBound::AtMostUnit => {
                let mut b = BlockBuilder::new(ConeKind::Nonneg, 1, format!("{}:mass", v.name));
                b.add_constant(0, 0, 1.0);
                b.add(off, 0, 0, -1.0);
                program.add_block(b.build());
            }
            MassBound::Implied => {}
        }
    }
    for c in &problem.constraints {
        match c {
            MomentConstraint::Linear { functional, rhs } => {
                if functional.degree() > deg {
                    continue;
                }
                let terms =
                    functional.terms.iter().map(|t| (layout[t.var].offset + t.alpha.grlex_rank(), t.coef)).collect();
                program.add_equality(terms, *rhs);
            }
            MomentConstraint::Sequence { dim, terms, target } => {
                if let Some(m) = target {
                    if m.order() < deg {
                        return Err(Error::DegreeOverflow { needed: deg, available: m.order() });
                    }
                }
                for beta in enumerate_indices(*dim, deg) {
                    let row = terms
                        .iter()
                        .map(|t| (layout[t.var].offset + problem.term_index(t, &beta).grlex_rank(), t.coef))
                        .collect();
                    let rhs = match target {
                        Some(m) => m.get(&beta)?,
                        None => 0.0,
                    };
                    program.add_equality(row, rhs);
                }
            }
        }
    }
    for t in &objective.terms {
        if t.alpha.degree() > deg {
            return Err(Error::DegreeOverflow { needed: t.alpha.degree(), available: deg });
        }
        program.objective[layout[t.var].offset + t.alpha.grlex_rank()] += t.coef;
    }
    Ok(Assembly { order: r, program, layout })
}

/// Outcome of one relaxation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationResult {
    pub order: usize,
    /// Optimal value of the relaxation, a lower bound on the problem value.
    pub rho: f64,
    pub status: SolveStatus,
    /// Moment sequences per variable, in normalized coordinates.
    pub sequences: Vec<TruncatedMomentSequence>,
    /// Largest violation of mass and marginal constraints.
    pub max_constraint_residual: f64,
    /// Smallest eigenvalue over all moment and localizing matrices.
    pub min_psd_eigenvalue: f64,
    pub num_scalar_variables: usize,
    pub num_blocks: usize,
    pub runtime_s: f64,
    pub report: SolveReport,
}

/// Smallest eigenvalue of all moment and localizing matrices of `seqs`.
pub fn min_psd_eigenvalue(
    problem: &GeneralizedMomentProblem,
    seqs: &[TruncatedMomentSequence],
    r: usize,
    schmudgen: bool,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (v, y) in problem.variables.iter().zip(seqs) {
        let mut locs = vec![Polynomial::constant(v.dim(), 1.0)];
        locs.extend(localizers(v.support.inequalities(), r, schmudgen)?.into_iter().map(|(_, g)| g));
        for g in locs {
            let d = g.degree().div_ceil(2);
            if d <= r {
                worst = worst.min(localizing_matrix(y, &g, r - d)?.min_eigenvalue());
            }
        }
    }
    Ok(worst)
}

/// Assembles and solves the order-`r` relaxation.
pub fn solve_order(
    problem: &GeneralizedMomentProblem,
    r: usize,
    options: &RelaxationOptions,
) -> Result<RelaxationResult> {
    let start = Instant::now();
    let asm = assemble(problem, r, options)?;
    let sol = solve(&asm.program, &options.solver);
    if !sol.report.status.is_success() {
        return Err(Error::Solver { status: sol.report.status, report: Box::new(sol.report) });
    }
    let sequences = asm.sequences(&sol.y);
    Ok(RelaxationResult {
        order: r,
        rho: asm.program.objective_value(&sol.y),
        status: sol.report.status,
        max_constraint_residual: problem.constraint_residual(&sequences, 2 * r)?,
        min_psd_eigenvalue: min_psd_eigenvalue(problem, &sequences, r, options.schmudgen)?,
        sequences,
        num_scalar_variables: asm.program.num_vars,
        num_blocks: asm.program.blocks.len(),
        runtime_s: start.elapsed().as_secs_f64(),
        report: sol.report,
    })
}

/// One order of a hierarchy sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyEntry {
    pub order: usize,
    pub result: Option<RelaxationResult>,
    pub error: Option<String>,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub entries: Vec<HierarchyEntry>,
    /// Orders `r` whose value fell below the previous order's value by more
    /// than the tolerance.
    pub monotonicity_violations: Vec<usize>,
}

/// Tolerance for `rho_{r+1} >= rho_r`, relative to `max(1, |rho_r|)`.
pub const MONOTONICITY_TOL: f64 = 1e-7;

/// Solves orders `r_min..=r_max`. Failures are recorded per order and the
/// sweep continues.
pub fn hierarchy(
    problem: &GeneralizedMomentProblem,
    r_min: usize,
    r_max: usize,
    options: &RelaxationOptions,
) -> Result<HierarchyReport> {
    let rmin = minimum_order(problem);
    if r_min < rmin {
        return Err(Error::OrderTooLow { order: r_min, minimum: rmin });
    }
    if r_max < r_min {
        return Err(invalid("empty order range"));
    }
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    let mut last: Option<f64> = None;
    for r in r_min..=r_max {
        let start = Instant::now();
        let (result, error) = match solve_order(problem, r, options) {
            Ok(res) => (Some(res), None),
            Err(e) => (None, Some(e.to_string())),
        };
        if let Some(res) = &result {
            if let Some(prev) = last {
                if res.rho < prev - MONOTONICITY_TOL * prev.abs().max(1.0) {
                    violations.push(r);
                }
            }
            last = Some(res.rho);
        }
        entries.push(HierarchyEntry { order: r, result, error, runtime_s: start.elapsed().as_secs_f64() });
    }
    Ok(HierarchyReport { entries, monotonicity_violations: violations })
}

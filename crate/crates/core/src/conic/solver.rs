//! Primal-dual interior-point method for linear matrix inequalities.
//!
//! The reduced program is `min c^T y` subject to `Z = G_0 + sum y_i G_i`
//! positive semidefinite, with dual `max -G_0 . X` subject to
//! `G_i . X = c_i` and `X` positive semidefinite. Iterates may be
//! infeasible. Search directions are HKM with a Mehrotra
//! predictor-corrector step.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::presolve::{eliminate, reduce, remove_lineality, Lineality, PresolveOutcome, ReducedProgram};
use super::program::{ConicProgram, SymSparse};

/// Termination status of [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped on the iteration cap or a stall with small residuals.
    NearOptimal,
    /// No `y` satisfies the constraints.
    PrimalInfeasible,
    /// The objective is unbounded below.
    DualInfeasible,
    Failure,
}

impl SolveStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relative tolerance on primal and dual infeasibility and the gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Equilibrate variables and blocks before iterating.
    pub scaling: bool,
    /// 0 is silent; 1 prints one line per iteration to stderr.
    pub verbosity: u8,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100, scaling: true, verbosity: 0 }
    }
}

/// Per-iteration trace entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative residuals of the reduced, scaled problem at termination.
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    /// Residuals of the original program at the returned point.
    pub max_equality_residual: f64,
    pub min_block_eigenvalue: f64,
    pub eliminated_variables: usize,
    /// Equality rows consumed by presolve, including redundant ones.
    pub removed_equalities: usize,
    pub message: String,
    pub history: Vec<IterationLog>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub y: Vec<f64>,
    pub report: SolveReport,
}

/// Solves a conic program. Never panics on bad data: structural problems
/// are reported as [`SolveStatus::Failure`].
pub fn solve(program: &ConicProgram, options: &SolverOptions) -> Solution {
    let fail = |msg: String, y: Vec<f64>| Solution {
        report: SolveReport {
            status: SolveStatus::Failure,
            iterations: 0,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            primal_infeasibility: f64::NAN,
            dual_infeasibility: f64::NAN,
            relative_gap: f64::NAN,
            max_equality_residual: f64::NAN,
            min_block_eigenvalue: f64::NAN,
            eliminated_variables: 0,
            removed_equalities: 0,
            message: msg,
            history: Vec::new(),
        },
        y,
    };
    if let Err(e) = program.validate() {
        return fail(e.to_string(), vec![0.0; program.num_vars]);
    }
    let elim = match eliminate(program) {
        PresolveOutcome::Reduced(e) => e,
        PresolveOutcome::Inconsistent { row, residual } => {
            let mut s = fail(
                format!("equality row {row} is inconsistent (residual {residual:.3e})"),
                vec![0.0; program.num_vars],
            );
            s.report.status = SolveStatus::PrimalInfeasible;
            return s;
        }
    };
    let reduced = reduce(program, &elim);
    let (reduced, basis) = match remove_lineality(&reduced) {
        Lineality::None => (reduced, None),
        Lineality::Removed { program, basis } => (program, Some(basis)),
        Lineality::Unbounded => {
            let mut s = fail(
                "objective decreases along a direction that leaves every block unchanged".into(),
                vec![0.0; program.num_vars],
            );
            s.report.status = SolveStatus::DualInfeasible;
            return s;
        }
    };
    let scaling = if options.scaling { Scaling::ruiz(&reduced) } else { Scaling::identity(&reduced) };
    let scaled = scaling.apply(&reduced);
    let out = Ipm::new(&scaled, options).run();
    let mut w: Vec<f64> = out.y.iter().zip(&scaling.var).map(|(v, d)| v * d).collect();
    if let Some(b) = &basis {
        w = (b * DVector::from_vec(w)).as_slice().to_vec();
    }
    let y = elim.expand(&w);
    let report = SolveReport {
        status: out.status,
        iterations: out.iterations,
        primal_objective: out.pobj / scaling.obj + reduced.offset,
        dual_objective: out.dobj / scaling.obj + reduced.offset,
        primal_infeasibility: out.pinf,
        dual_infeasibility: out.dinf,
        relative_gap: out.gap,
        max_equality_residual: program.max_equality_residual(&y),
        min_block_eigenvalue: program.min_block_eigenvalue(&y),
        eliminated_variables: program.num_vars - elim.reduced_vars,
        removed_equalities: elim.removed_rows,
        message: out.message,
        history: out.history,
    };
    Solution { y, report }
}

/// Diagonal equilibration: `y_i = var_i * yhat_i`, block `k` multiplied
/// by `block_k`, objective multiplied by `obj`.
struct Scaling {
    var: Vec<f64>,
    block: Vec<f64>,
    obj: f64,
}

impl Scaling {
    fn identity(p: &ReducedProgram) -> Self {
        Self { var: vec![1.0; p.num_vars], block: vec![1.0; p.blocks.len()], obj: 1.0 }
    }

    fn ruiz(p: &ReducedProgram) -> Self {
        let mut s = Self::identity(p);
        for _ in 0..12 {
            let mut vnorm = vec![0.0f64; p.num_vars];
            let mut bnorm = vec![0.0f64; p.blocks.len()];
            for (k, b) in p.blocks.iter().enumerate() {
                for (v, f) in &b.coefficients {
                    let a = f.max_abs() * s.var[*v] * s.block[k];
                    vnorm[*v] = vnorm[*v].max(a);
                    bnorm[k] = bnorm[k].max(a);
                }
            }
            let mut worst = 0.0f64;
            for (d, n) in s.var.iter_mut().zip(&vnorm) {
                if *n > 0.0 {
                    *d /= n.sqrt();
                    worst = worst.max((n.ln()).abs());
                }
            }
            for (d, n) in s.block.iter_mut().zip(&bnorm) {
                if *n > 0.0 {
                    *d /= n.sqrt();
                    worst = worst.max((n.ln()).abs());
                }
            }
            if worst < 1e-3 {
                break;
            }
        }
        let cmax = p.objective.iter().zip(&s.var).fold(0.0f64, |m, (c, d)| m.max((c * d).abs()));
        if cmax > 0.0 {
            s.obj = 1.0 / cmax;
        }
        s
    }

    fn apply(&self, p: &ReducedProgram) -> ReducedProgram {
        let scale =
            |f: &SymSparse, a: f64| SymSparse { entries: f.entries.iter().map(|&(i, j, v)| (i, j, v * a)).collect() };
        ReducedProgram {
            num_vars: p.num_vars,
            objective: p.objective.iter().zip(&self.var).map(|(c, d)| c * d * self.obj).collect(),
            offset: 0.0,
            blocks: p
                .blocks
                .iter()
                .zip(&self.block)
                .map(|(b, &s)| super::presolve::ReducedBlock {
                    size: b.size,
                    constant: scale(&b.constant, s),
                    coefficients: b.coefficients.iter().map(|(v, f)| (*v, scale(f, s * self.var[*v]))).collect(),
                })
                .collect(),
        }
    }
}

struct IpmOutcome {
    y: Vec<f64>,
    status: SolveStatus,
    iterations: usize,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
    message: String,
    history: Vec<IterationLog>,
}

struct Ipm<'a> {
    p: &'a ReducedProgram,
    opt: &'a SolverOptions,
    y: DVector<f64>,
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    /// Total cone dimension for the barrier parameter.
    nu: f64,
    g0_norm: f64,
    c_norm: f64,
}

struct Residuals {
    rp: Vec<DMatrix<f64>>,
    rd: DVector<f64>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
    mu: f64,
}

struct Direction {
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
    dx: Vec<DMatrix<f64>>,
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>()
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `alpha` with `m + alpha * dm` positive semidefinite, given `m`
/// positive definite.
fn max_step(m: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        let (a, d) = (m[(0, 0)], dm[(0, 0)]);
        return if d < 0.0 { -a / d } else { f64::INFINITY };
    }
    let Some(ch) = Cholesky::new(m.clone()) else { return 0.0 };
    let l = ch.l();
    let Some(a) = l.solve_lower_triangular(dm) else { return 0.0 };
    let Some(s) = l.solve_lower_triangular(&a.transpose()) else { return 0.0 };
    let lmin = sym(&s).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 1 {
        let v = m[(0, 0)];
        return (v > 0.0).then(|| DMatrix::from_element(1, 1, 1.0 / v));
    }
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

impl<'a> Ipm<'a> {
    fn new(p: &'a ReducedProgram, opt: &'a SolverOptions) -> Self {
        let g0_norm =
            p.blocks.iter().map(|b| b.constant.entries.iter().map(|e| e.2 * e.2).sum::<f64>()).sum::<f64>().sqrt();
        let c_norm = p.objective.iter().map(|c| c * c).sum::<f64>().sqrt();
        let gmax = p.blocks.iter().fold(0.0f64, |m, b| m.max(b.constant.max_abs()));
        let cmax = p.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let xi_p = 10.0 * gmax.max(1.0);
        let xi_d = 10.0 * cmax.max(1.0);
        let z = p.blocks.iter().map(|b| DMatrix::identity(b.size, b.size) * xi_p).collect();
        let x = p.blocks.iter().map(|b| DMatrix::identity(b.size, b.size) * xi_d).collect();
        let nu = p.blocks.iter().map(|b| b.size as f64).sum();
        Self { p, opt, y: DVector::zeros(p.num_vars), x, z, nu, g0_norm, c_norm }
    }

    fn evaluate(&self, y: &DVector<f64>, k: usize) -> DMatrix<f64> {
        let b = &self.p.blocks[k];
        let mut m = b.constant.to_dense(b.size);
        for (v, f) in &b.coefficients {
            f.add_to(&mut m, y[*v]);
        }
        m
    }

    /// `sum_i d_i G_i` for block `k`, without the constant.
    fn apply_linear(&self, d: &DVector<f64>, k: usize) -> DMatrix<f64> {
        let b = &self.p.blocks[k];
        let mut m = DMatrix::zeros(b.size, b.size);
        for (v, f) in &b.coefficients {
            f.add_to(&mut m, d[*v]);
        }
        m
    }

    /// `(G_i . M_k)_i` summed over blocks.
    fn adjoint(&self, ms: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.num_vars);
        for (b, m) in self.p.blocks.iter().zip(ms) {
            for (v, f) in &b.coefficients {
                out[*v] += f.dot(m);
            }
        }
        out
    }

    fn residuals(&self) -> Residuals {
        let nb = self.p.blocks.len();
        let rp: Vec<DMatrix<f64>> = (0..nb).map(|k| self.evaluate(&self.y, k) - &self.z[k]).collect();
        let c = DVector::from_column_slice(&self.p.objective);
        let rd = &c - self.adjoint(&self.x);
        let pobj = c.dot(&self.y);
        let dobj = -self.p.blocks.iter().zip(&self.x).map(|(b, x)| b.constant.dot(x)).sum::<f64>();
        let pinf = rp.iter().map(frob).sum::<f64>().sqrt() / (1.0 + self.g0_norm);
        let dinf = rd.norm() / (1.0 + self.c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mu = self.x.iter().zip(&self.z).map(|(x, z)| inner(x, z)).sum::<f64>() / self.nu;
        Residuals { rp, rd, pobj, dobj, pinf, dinf, gap, mu }
    }

    /// Schur complement `H_ij = G_i . (X G_j Z^{-1})`.
    fn schur(&self, w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.p.num_vars;
        let mut h = DMatrix::zeros(m, m);
        for (k, b) in self.p.blocks.iter().enumerate() {
            let (x, wk) = (&self.x[k], &w[k]);
            let n = b.size;
            if n == 1 {
                let f = x[(0, 0)] * wk[(0, 0)];
                for (a, (vi, fi)) in b.coefficients.iter().enumerate() {
                    let gi = fi.entries[0].2;
                    for (vj, fj) in &b.coefficients[a..] {
                        h[(*vi, *vj)] += f * gi * fj.entries[0].2;
                    }
                }
                continue;
            }
            let mut pm = DMatrix::zeros(n, n);
            for (a, (vi, fi)) in b.coefficients.iter().enumerate() {
                pm.fill(0.0);
                for &(r, c, v) in &fi.entries {
                    pm.ger(v, &x.column(r), &wk.column(c), 1.0);
                    if r != c {
                        pm.ger(v, &x.column(c), &wk.column(r), 1.0);
                    }
                }
                for (vj, fj) in &b.coefficients[a..] {
                    h[(*vi, *vj)] += fj.dot(&pm);
                }
            }
        }
        // Coefficient lists are sorted by variable, so only the upper
        // triangle was filled.
        for i in 0..m {
            for j in 0..i {
                h[(i, j)] = h[(j, i)];
            }
        }
        h
    }

    fn factor(h: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
        let dmax = h.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
        if let Some(c) = Cholesky::new(h.clone()) {
            return Some(c);
        }
        let mut delta = 1e-14 * dmax;
        while delta < 1e-4 * dmax {
            let mut hr = h.clone();
            for i in 0..hr.nrows() {
                hr[(i, i)] += delta;
            }
            if let Some(c) = Cholesky::new(hr) {
                return Some(c);
            }
            delta *= 100.0;
        }
        None
    }

    /// Solves for a direction given the target `sigma * mu` and an optional
    /// second-order correction term per block.
    fn direction(
        &self,
        chol: &Cholesky<f64, Dyn>,
        h: &DMatrix<f64>,
        res: &Residuals,
        w: &[DMatrix<f64>],
        target: f64,
        corr: Option<&[DMatrix<f64>]>,
    ) -> Direction {
        let nb = self.p.blocks.len();
        let mut t: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for k in 0..nb {
            let mut tk = &w[k] * target - &self.x[k] - sym(&(&self.x[k] * &res.rp[k] * &w[k]));
            if let Some(c) = corr {
                tk -= sym(&c[k]);
            }
            t.push(tk);
        }
        let rhs = self.adjoint(&t) - &res.rd;
        let mut dy = chol.solve(&rhs);
        // The Schur complement becomes ill-conditioned near degenerate
        // optima and may have been regularized; refine against the exact one.
        for _ in 0..REFINE_STEPS {
            let e = &rhs - h * &dy;
            if e.norm() <= 1e-15 * rhs.norm() {
                break;
            }
            dy += chol.solve(&e);
        }
        let dz: Vec<DMatrix<f64>> = (0..nb).map(|k| self.apply_linear(&dy, k) + &res.rp[k]).collect();
        let dx: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let mut d = &w[k] * target - &self.x[k] - &self.x[k] * &dz[k] * &w[k];
                if let Some(c) = corr {
                    d -= &c[k];
                }
                sym(&d)
            })
            .collect();
        Direction { dy, dz, dx }
    }

    fn steps(&self, d: &Direction) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for k in 0..self.p.blocks.len() {
            ap = ap.min(max_step(&self.z[k], &d.dz[k]));
            ad = ad.min(max_step(&self.x[k], &d.dx[k]));
        }
        (ap, ad)
    }

    fn outcome(
        &self,
        status: SolveStatus,
        it: usize,
        r: &Residuals,
        msg: &str,
        history: Vec<IterationLog>,
    ) -> IpmOutcome {
        IpmOutcome {
            y: self.y.iter().copied().collect(),
            status,
            iterations: it,
            pobj: r.pobj,
            dobj: r.dobj,
            pinf: r.pinf,
            dinf: r.dinf,
            gap: r.gap,
            message: msg.to_string(),
            history,
        }
    }

    fn certificate(&self, r: &Residuals) -> Option<SolveStatus> {
        // Dual ray: X >= 0 with G_i . X = 0 and G_0 . X < 0.
        let t = r.dobj;
        if t > 1e8 * (1.0 + r.pobj.abs()) {
            let c = DVector::from_column_slice(&self.p.objective);
            let ax = &c - &r.rd;
            if ax.norm() / t < 1e-8 {
                return Some(SolveStatus::PrimalInfeasible);
            }
        }
        // Primal ray: sum d_i G_i >= 0 with c^T d < 0.
        if r.pobj < -1e8 * (1.0 + r.dobj.abs()) {
            let d = &self.y / (-r.pobj);
            let lmin = (0..self.p.blocks.len())
                .map(|k| {
                    let m = self.apply_linear(&d, k);
                    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min);
            if lmin > -1e-8 {
                return Some(SolveStatus::DualInfeasible);
            }
        }
        None
    }

    fn run(mut self) -> IpmOutcome {
        let tol = self.opt.tol;
        let mut history = Vec::new();
        if self.p.num_vars == 0 {
            let r = self.residuals();
            let feasible = self.p.blocks.iter().all(|b| {
                let m = b.constant.to_dense(b.size);
                m.symmetric_eigenvalues().iter().all(|&l| l >= -tol)
            });
            let st = if feasible { SolveStatus::Optimal } else { SolveStatus::PrimalInfeasible };
            let mut out = self.outcome(st, 0, &r, "no free variables after presolve", history);
            out.pinf = 0.0;
            out.dinf = 0.0;
            out.gap = 0.0;
            out.dobj = out.pobj;
            return out;
        }
        let mut best = Best { merit: f64::INFINITY, iteration: 0, y: self.y.clone(), residuals: None };
        for it in 0..self.opt.max_iter {
            let r = self.residuals();
            if r.pinf <= tol && r.dinf <= tol && r.gap <= tol {
                return self.outcome(SolveStatus::Optimal, it, &r, "converged", history);
            }
            if let Some(st) = self.certificate(&r) {
                return self.outcome(st, it, &r, "infeasibility certificate", history);
            }
            if !(r.pobj.is_finite() && r.dobj.is_finite() && r.mu.is_finite()) {
                return self.finish_best(best, it, "non-finite iterate", history);
            }
            let merit = r.pinf.max(r.dinf).max(r.gap);
            if merit < best.merit {
                best = Best { merit, iteration: it, y: self.y.clone(), residuals: Some(r.summary()) };
            } else if it >= best.iteration + STALL_WINDOW {
                return self.finish_best(best, it, "no progress", history);
            }
            let Some(w) = self.z.iter().map(spd_inverse).collect::<Option<Vec<_>>>() else {
                return self.finish_best(best, it, "slack lost definiteness", history);
            };
            let h = self.schur(&w);
            let Some(chol) = Self::factor(h.clone()) else {
                return self.finish_best(best, it, "Schur complement is singular", history);
            };
            // Predictor.
            let aff = self.direction(&chol, &h, &r, &w, 0.0, None);
            let (ap, ad) = self.steps(&aff);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for k in 0..self.p.blocks.len() {
                let xa = &self.x[k] + &aff.dx[k] * ad;
                let za = &self.z[k] + &aff.dz[k] * ap;
                mu_aff += inner(&xa, &za);
            }
            mu_aff /= self.nu;
            // Less aggressive centering when the predictor is blocked.
            let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
            let sigma = (mu_aff / r.mu).clamp(0.0, 1.0).powf(expon);
            // Corrector.
            let corr: Vec<DMatrix<f64>> = (0..self.p.blocks.len()).map(|k| &aff.dx[k] * &aff.dz[k] * &w[k]).collect();
            let d = self.direction(&chol, &h, &r, &w, sigma * r.mu, Some(&corr));
            let (mp, md) = self.steps(&d);
            let gamma = 0.9 + 0.09 * mp.min(md).min(1.0);
            let ap = (gamma * mp).min(1.0);
            let ad = (gamma * md).min(1.0);
            self.y += &d.dy * ap;
            for k in 0..self.p.blocks.len() {
                self.z[k] += &d.dz[k] * ap;
                self.z[k] = sym(&self.z[k]);
                self.x[k] += &d.dx[k] * ad;
                self.x[k] = sym(&self.x[k]);
            }
            let log = IterationLog {
                iteration: it,
                primal_objective: r.pobj,
                dual_objective: r.dobj,
                primal_infeasibility: r.pinf,
                dual_infeasibility: r.dinf,
                relative_gap: r.gap,
                step_primal: ap,
                step_dual: ad,
            };
            if self.opt.verbosity > 0 {
                eprintln!(
                    "{:3} pobj {:+.10e} dobj {:+.10e} pinf {:.2e} dinf {:.2e} gap {:.2e} mu {:.2e} ap {:.3} ad {:.3}",
                    it, r.pobj, r.dobj, r.pinf, r.dinf, r.gap, r.mu, ap, ad
                );
            }
            history.push(log);
        }
        let r = self.residuals();
        let merit = r.pinf.max(r.dinf).max(r.gap);
        if merit < best.merit {
            best = Best { merit, iteration: self.opt.max_iter, y: self.y.clone(), residuals: Some(r.summary()) };
        }
        self.finish_best(best, self.opt.max_iter, "iteration limit", history)
    }

    /// Returns the best iterate seen, classified against the loose tolerance.
    fn finish_best(&self, best: Best, it: usize, why: &str, history: Vec<IterationLog>) -> IpmOutcome {
        let Some(s) = best.residuals else {
            let r = self.residuals();
            return self.outcome(SolveStatus::Failure, it, &r, why, history);
        };
        let loose = (self.opt.tol * 1e3).max(1e-6);
        let status = if best.merit <= self.opt.tol {
            SolveStatus::Optimal
        } else if best.merit <= loose {
            SolveStatus::NearOptimal
        } else {
            SolveStatus::Failure
        };
        IpmOutcome {
            y: best.y.iter().copied().collect(),
            status,
            iterations: it,
            pobj: s.pobj,
            dobj: s.dobj,
            pinf: s.pinf,
            dinf: s.dinf,
            gap: s.gap,
            message: format!("{why}; best iterate {}", best.iteration),
            history,
        }
    }
}

const REFINE_STEPS: usize = 3;

/// Iterations without improvement of the merit before giving up.
const STALL_WINDOW: usize = 8;

struct Summary {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
}

struct Best {
    merit: f64,
    iteration: usize,
    y: DVector<f64>,
    residuals: Option<Summary>,
}

impl Residuals {
    fn summary(&self) -> Summary {
        Summary { pobj: self.pobj, dobj: self.dobj, pinf: self.pinf, dinf: self.dinf, gap: self.gap }
    }
}

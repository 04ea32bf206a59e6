//! Subcommand implementations. Every command validates its inputs before
//! creating the output directory, so configuration errors leave no files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use momentot::conic::{export_sdpa, SolveStatus};
use momentot::formulations::{
    build_barycenter_wp, build_gw_barycenter, build_gw_even, build_multimarginal, build_wp_even, build_wp_odd,
    gw_fixed_point, gw_linearize, FixedPointOutcome, GeneralizedMomentProblem, Objective, ProblemKind,
};
use momentot::io;
use momentot::moments::TruncatedMomentSequence;
use momentot::polyalg::{DiagonalAffine, Polynomial};
use momentot::postprocess::{support_estimate, ChristoffelModel, RegularGrid, SupportEstimate};
use momentot::relaxation::{assemble, minimum_order, solve_order, RelaxationResult, MONOTONICITY_TOL};
use momentot::Error;
use serde::Serialize;

use crate::config::{LoadedData, OrderRange, ProblemSpec, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Support,
    Gw,
    Barycenter,
    ExportSdpa,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Support => "support",
            Command::Gw => "gw",
            Command::Barycenter => "barycenter",
            Command::ExportSdpa => "export-sdpa",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub orders: Option<OrderRange>,
    pub eta: Option<f64>,
    pub grid: Option<Vec<usize>>,
    pub seed: Option<u64>,
}

/// Why a command did not finish cleanly, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Invalid config, unreadable input, or an order below `r*`. Exit 1.
    Config(String),
    /// The conic solver did not reach an optimal status. Exit 2.
    Solver(String),
    /// A fixed-point iteration hit its cap; the best iterate was written. Exit 3.
    NotConverged(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver(_) => 2,
            Failure::NotConverged(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::NotConverged(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } => Failure::Solver(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o error: {e}"))
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Runs `command` with the config at `config_path`, writing into `out`.
pub fn run(command: Command, config_path: &Path, out: &Path, overrides: &Overrides) -> CmdResult<()> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut config = RunConfig::load(config_path)
        .map_err(|e| Failure::Config(format!("cannot load config {}: {e}", config_path.display())))?;
    apply_overrides(&mut config, overrides)?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = Context { config, base, out: out.to_path_buf() };
    let result = match command {
        Command::Solve => ctx.solve(),
        Command::Sweep => ctx.sweep(),
        Command::Support => ctx.support(),
        Command::Gw => ctx.gw(),
        Command::Barycenter => ctx.barycenter(),
        Command::ExportSdpa => ctx.export_sdpa(),
    };
    if out.is_dir() {
        let meta = Metadata {
            command: command.name(),
            version: env!("CARGO_PKG_VERSION"),
            config: config_path.display().to_string(),
            started_unix_s: unix_seconds(started),
            finished_unix_s: unix_seconds(SystemTime::now()),
            wall_time_s: clock.elapsed().as_secs_f64(),
            exit_code: result.as_ref().err().map_or(0, Failure::exit_code),
        };
        write_json(&out.join("metadata.json"), &meta)?;
    }
    result
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn apply_overrides(config: &mut RunConfig, o: &Overrides) -> CmdResult<()> {
    if let Some(r) = o.order {
        config.order = Some(r);
    }
    if let Some(r) = o.orders {
        config.orders = Some(r);
    }
    if let Some(eta) = o.eta {
        config.postprocess.eta = eta;
    }
    if let Some(g) = &o.grid {
        config.postprocess.grid = g.clone();
    }
    if let Some(s) = o.seed {
        config.seed = s;
    }
    let eta = config.postprocess.eta;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Failure::Config(format!("eta must lie in (0, 1), got {eta}")));
    }
    if config.postprocess.grid.is_empty() || config.postprocess.grid.contains(&0) {
        return Err(Failure::Config("grid resolution must be positive".into()));
    }
    Ok(())
}

/// Timestamps and wall time, kept apart from the deterministic outputs.
#[derive(Serialize)]
struct Metadata {
    command: &'static str,
    version: &'static str,
    config: String,
    started_unix_s: f64,
    finished_unix_s: f64,
    wall_time_s: f64,
    exit_code: u8,
}

#[derive(Serialize)]
struct SolveSummary {
    kind: ProblemKind,
    order: usize,
    minimum_order: usize,
    rho: f64,
    /// `sqrt(max(rho, 0))`.
    sqrt_rho: f64,
    /// `rho^(1/p)` for Wasserstein problems.
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
    status: SolveStatus,
    max_constraint_residual: f64,
    min_psd_eigenvalue: f64,
    num_scalar_variables: usize,
    num_blocks: usize,
    iterations: usize,
    primal_objective: f64,
    dual_objective: f64,
    relative_gap: f64,
    primal_infeasibility: f64,
    dual_infeasibility: f64,
    eliminated_variables: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl SolveSummary {
    fn new(problem: &GeneralizedMomentProblem, res: &RelaxationResult, weights: Option<&[f64]>) -> Self {
        let distance = match problem.kind {
            ProblemKind::Wasserstein { p } => Some(res.rho.max(0.0).powf(1.0 / p as f64)),
            _ => None,
        };
        let rep = &res.report;
        Self {
            kind: problem.kind.clone(),
            order: res.order,
            minimum_order: minimum_order(problem),
            rho: res.rho,
            sqrt_rho: res.rho.max(0.0).sqrt(),
            distance,
            status: res.status,
            max_constraint_residual: res.max_constraint_residual,
            min_psd_eigenvalue: res.min_psd_eigenvalue,
            num_scalar_variables: res.num_scalar_variables,
            num_blocks: res.num_blocks,
            iterations: rep.iterations,
            primal_objective: rep.primal_objective,
            dual_objective: rep.dual_objective,
            relative_gap: rep.relative_gap,
            primal_infeasibility: rep.primal_infeasibility,
            dual_infeasibility: rep.dual_infeasibility,
            eliminated_variables: rep.eliminated_variables,
            weights: weights.map(<[f64]>::to_vec),
        }
    }
}

#[derive(Serialize)]
struct FailureSummary<'a> {
    kind: ProblemKind,
    order: usize,
    status: Option<SolveStatus>,
    error: &'a str,
}

#[derive(Serialize)]
struct FixedPointSummary {
    kind: ProblemKind,
    order: usize,
    minimum_order: usize,
    /// Smallest quadratic objective over the iterates.
    rho: f64,
    sqrt_rho: f64,
    converged: bool,
    iterations: usize,
    best_iteration: usize,
    last_status: SolveStatus,
    max_constraint_residual: f64,
    min_psd_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stopped_early: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl FixedPointSummary {
    fn new(problem: &GeneralizedMomentProblem, o: &FixedPointOutcome, weights: Option<&[f64]>) -> Self {
        Self {
            kind: problem.kind.clone(),
            order: o.order,
            minimum_order: minimum_order(problem),
            rho: o.best_value,
            sqrt_rho: o.best_value.max(0.0).sqrt(),
            converged: o.converged,
            iterations: o.trace.len(),
            best_iteration: o.best_iteration,
            last_status: o.last.status,
            max_constraint_residual: o.last.max_constraint_residual,
            min_psd_eigenvalue: o.last.min_psd_eigenvalue,
            stopped_early: o.stopped_early.clone(),
            weights: weights.map(<[f64]>::to_vec),
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '+' => 'p',
            '-' => 'm',
            c if c.is_ascii_alphanumeric() || c == '_' => c,
            _ => '_',
        })
        .collect()
}

/// Readouts as `<name>.csv` and variables as `var_<name>.csv`, all in
/// original coordinates.
fn write_moments(dir: &Path, problem: &GeneralizedMomentProblem, seqs: &[TruncatedMomentSequence]) -> CmdResult<()> {
    for r in &problem.readouts {
        io::write_moments_csv(&dir.join(format!("{}.csv", file_stem(&r.name))), &problem.readout(&r.name, seqs)?)?;
    }
    for (k, (v, y)) in problem.variables.iter().zip(seqs).enumerate() {
        let y = problem.original_sequence(k, y)?;
        io::write_moments_csv(&dir.join(format!("var_{}.csv", file_stem(&v.name))), &y)?;
    }
    Ok(())
}

fn trace_csv(o: &FixedPointOutcome) -> String {
    let mut s = String::from("iteration,linearized,quadratic,relative_change\n");
    for t in &o.trace {
        let ch = t.relative_change.map_or(String::new(), |c| format!("{c:e}"));
        let _ = writeln!(s, "{},{:e},{:e},{ch}", t.iteration, t.linearized, t.quadratic);
    }
    s
}

/// One solved order, linear or fixed-point.
enum Solved {
    Linear(RelaxationResult),
    FixedPoint(FixedPointOutcome),
}

impl Solved {
    fn rho(&self) -> f64 {
        match self {
            Solved::Linear(r) => r.rho,
            Solved::FixedPoint(o) => o.best_value,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Solved::Linear(r) if r.status == SolveStatus::Optimal => "optimal",
            Solved::Linear(_) => "near-optimal",
            Solved::FixedPoint(o) if o.converged => "converged",
            Solved::FixedPoint(_) => "not-converged",
        }
    }

    fn sequences(&self) -> &[TruncatedMomentSequence] {
        match self {
            Solved::Linear(r) => &r.sequences,
            Solved::FixedPoint(o) => &o.best,
        }
    }
}

struct Context {
    config: RunConfig,
    base: PathBuf,
    out: PathBuf,
}

impl Context {
    fn single_order(&self) -> CmdResult<usize> {
        self.config
            .order
            .or(self.config.orders.map(|r| r.min))
            .ok_or_else(|| Failure::Config("no relaxation order given (--order or `order`)".into()))
    }

    fn order_range(&self) -> CmdResult<OrderRange> {
        match (self.config.orders, self.config.order) {
            (Some(r), _) => Ok(r),
            (None, Some(r)) => Ok(OrderRange { min: r, max: r }),
            (None, None) => Err(Failure::Config("no relaxation orders given (--orders or `orders`)".into())),
        }
    }

    fn weight_sets(&self) -> Option<&[Vec<f64>]> {
        match &self.config.problem {
            ProblemSpec::Barycenter { weights, .. } | ProblemSpec::GwBarycenter { weights } => Some(weights),
            _ => None,
        }
    }

    fn is_quadratic(&self) -> bool {
        matches!(self.config.problem, ProblemSpec::GromovWasserstein { .. } | ProblemSpec::GwBarycenter { .. })
    }

    fn build(&self, data: &LoadedData, weights: Option<&[f64]>) -> CmdResult<GeneralizedMomentProblem> {
        let m = &data.marginals;
        let s = &data.sets;
        let need = |k: usize| -> CmdResult<()> {
            if m.len() != k {
                return Err(Failure::Config(format!("this problem needs {k} marginals, got {}", m.len())));
            }
            Ok(())
        };
        let problem = match &self.config.problem {
            ProblemSpec::Wasserstein { p } => {
                need(2)?;
                if s[0] != s[1] {
                    return Err(Failure::Config("Wasserstein problems need one common set".into()));
                }
                if p % 2 == 0 {
                    build_wp_even(*p, &m[0], &m[1], &s[0])?
                } else {
                    build_wp_odd(*p, &m[0], &m[1], &s[0])?
                }
            }
            ProblemSpec::Multimarginal { cost } => {
                let n: usize = s.iter().map(|s| s.dim()).sum();
                build_multimarginal(&Polynomial::parse(cost, n)?, m, s)?
            }
            ProblemSpec::Barycenter { p, .. } => {
                if s.iter().any(|x| x != &s[0]) {
                    return Err(Failure::Config("barycenter problems need one common set".into()));
                }
                build_barycenter_wp(*p, m, weights.expect("weights for barycenter"), &s[0])?
            }
            ProblemSpec::GromovWasserstein { p, cost_x, cost_y } => {
                need(2)?;
                let cx = cost_x.to_cost(s[0].dim())?;
                let cy = cost_y.to_cost(s[1].dim())?;
                build_gw_even(*p, &cx, &cy, &m[0], &m[1], &s[0], &s[1])?
            }
            ProblemSpec::GwBarycenter { .. } => {
                build_gw_barycenter(m, weights.expect("weights for barycenter"), &s[0], s)?
            }
        };
        Ok(problem)
    }

    /// Loads data for orders up to `r_max`, builds one problem per weight
    /// set (or a single problem), and checks every order against `r*`.
    fn prepare(&self, r_min: usize, r_max: usize) -> CmdResult<Vec<(Option<Vec<f64>>, GeneralizedMomentProblem)>> {
        let data = self.config.load_data(&self.base, 2 * r_max)?;
        let runs: Vec<Option<Vec<f64>>> = match self.weight_sets() {
            Some(w) if w.is_empty() => return Err(Failure::Config("no weight vectors given".into())),
            Some(w) => w.iter().cloned().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for w in runs {
            let problem = self.build(&data, w.as_deref())?;
            let rmin = minimum_order(&problem);
            if r_min < rmin {
                return Err(Error::OrderTooLow { order: r_min, minimum: rmin }.into());
            }
            out.push((w, problem));
        }
        Ok(out)
    }

    fn create_out(&self) -> CmdResult<()> {
        fs::create_dir_all(&self.out)?;
        Ok(())
    }

    fn solve_one(&self, problem: &GeneralizedMomentProblem, r: usize) -> Result<Solved, Error> {
        match problem.objective {
            Objective::Linear(_) => solve_order(problem, r, &self.config.relaxation_options()).map(Solved::Linear),
            Objective::Quadratic(_) => {
                gw_fixed_point(problem, r, None, &self.config.fixed_point_options()).map(Solved::FixedPoint)
            }
        }
    }

    /// Writes `result.json`, moments and, for fixed points, `trace.csv`.
    /// Returns the failure to report, if any, after writing.
    fn write_order(
        &self,
        dir: &Path,
        problem: &GeneralizedMomentProblem,
        r: usize,
        solved: &Result<Solved, Error>,
        weights: Option<&[f64]>,
    ) -> CmdResult<Option<Failure>> {
        fs::create_dir_all(dir)?;
        match solved {
            Ok(Solved::Linear(res)) => {
                write_json(&dir.join("result.json"), &SolveSummary::new(problem, res, weights))?;
                write_moments(dir, problem, &res.sequences)?;
                Ok(None)
            }
            Ok(Solved::FixedPoint(o)) => {
                write_json(&dir.join("result.json"), &FixedPointSummary::new(problem, o, weights))?;
                fs::write(dir.join("trace.csv"), trace_csv(o))?;
                write_moments(dir, problem, &o.best)?;
                Ok((!o.converged).then(|| {
                    Failure::NotConverged(format!(
                        "fixed point did not converge at order {r} within {} iterations; best iterate written",
                        o.trace.len()
                    ))
                }))
            }
            Err(e) => {
                let status = match e {
                    Error::Solver { status, .. } => Some(*status),
                    _ => None,
                };
                let msg = e.to_string();
                write_json(
                    &dir.join("result.json"),
                    &FailureSummary { kind: problem.kind.clone(), order: r, status, error: &msg },
                )?;
                Ok(Some(Failure::Solver(format!("order {r}: {msg}"))))
            }
        }
    }

    fn only_problem(
        &self,
        runs: Vec<(Option<Vec<f64>>, GeneralizedMomentProblem)>,
    ) -> CmdResult<(Option<Vec<f64>>, GeneralizedMomentProblem)> {
        if runs.len() != 1 {
            return Err(Failure::Config("several weight vectors given; use the barycenter command".into()));
        }
        Ok(runs.into_iter().next().expect("one run"))
    }

    fn solve(&self) -> CmdResult<()> {
        let r = self.single_order()?;
        let (w, problem) = self.only_problem(self.prepare(r, r)?)?;
        let solved = self.solve_one(&problem, r);
        if let Err(e @ Error::OrderTooLow { .. }) = &solved {
            return Err(Failure::Config(e.to_string()));
        }
        self.create_out()?;
        match self.write_order(&self.out, &problem, r, &solved, w.as_deref())? {
            Some(f) => Err(f),
            None => Ok(()),
        }
    }

    fn gw(&self) -> CmdResult<()> {
        if !self.is_quadratic() {
            return Err(Failure::Config("the gw command needs a gromov-wasserstein problem".into()));
        }
        self.solve()
    }

    fn sweep(&self) -> CmdResult<()> {
        let range = self.order_range()?;
        let (w, problem) = self.only_problem(self.prepare(range.min, range.max)?)?;
        self.create_out()?;
        let mut summary = String::from("r,rho_r,runtime_s,status,monotone\n");
        let mut worst: Option<Failure> = None;
        let mut last: Option<f64> = None;
        for r in range.min..=range.max {
            let start = Instant::now();
            let solved = self.solve_one(&problem, r);
            let runtime = start.elapsed().as_secs_f64();
            let failure = self.write_order(&self.out.join(format!("r{r}")), &problem, r, &solved, w.as_deref())?;
            match &solved {
                Ok(s) => {
                    let rho = s.rho();
                    let monotone = last.is_none_or(|prev| rho >= prev - MONOTONICITY_TOL * prev.abs().max(1.0));
                    last = Some(rho);
                    let _ = writeln!(summary, "{r},{rho:e},{runtime:.3},{},{monotone}", s.status());
                }
                Err(_) => {
                    let _ = writeln!(summary, "{r},,{runtime:.3},failed,");
                }
            }
            worst = merge(worst, failure);
        }
        fs::write(self.out.join("summary.csv"), summary)?;
        worst.map_or(Ok(()), Err)
    }

    fn barycenter(&self) -> CmdResult<()> {
        if self.weight_sets().is_none() {
            return Err(Failure::Config("the barycenter command needs a barycenter problem".into()));
        }
        let range = self.order_range()?;
        let runs = self.prepare(range.min, range.max)?;
        self.create_out()?;
        let mut summary = String::from("run,weights,r,rho_r,runtime_s,status\n");
        let mut worst: Option<Failure> = None;
        for (k, (w, problem)) in runs.iter().enumerate() {
            let wtext =
                w.as_ref().map(|w| w.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")).unwrap_or_default();
            for r in range.min..=range.max {
                let start = Instant::now();
                let solved = self.solve_one(problem, r);
                let runtime = start.elapsed().as_secs_f64();
                let dir = self.out.join(format!("run{}", k + 1)).join(format!("r{r}"));
                let failure = self.write_order(&dir, problem, r, &solved, w.as_deref())?;
                match &solved {
                    Ok(s) => {
                        let bary = problem.readout("barycenter", s.sequences())?;
                        let est = self.support_grid(&bary, r)?;
                        self.write_support(&dir, &est)?;
                        let _ = writeln!(summary, "{},{wtext},{r},{:e},{runtime:.3},{}", k + 1, s.rho(), s.status());
                    }
                    Err(_) => {
                        let _ = writeln!(summary, "{},{wtext},{r},,{runtime:.3},failed", k + 1);
                    }
                }
                worst = merge(worst, failure);
            }
        }
        fs::write(self.out.join("summary.csv"), summary)?;
        worst.map_or(Ok(()), Err)
    }

    fn grid(&self, dim: usize) -> CmdResult<RegularGrid> {
        let pp = &self.config.postprocess;
        let (lo, hi) = match (&pp.grid_lo, &pp.grid_hi) {
            (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
            _ => self
                .config
                .set_specs()
                .map(|s| s[0].bounds())
                .map_err(|_| Failure::Config("support grid needs `grid_lo`/`grid_hi` or a set".into()))?,
        };
        let counts = if pp.grid.len() == 1 { vec![pp.grid[0]; dim] } else { pp.grid.clone() };
        if lo.len() != dim || hi.len() != dim || counts.len() != dim {
            return Err(Failure::Config(format!("support grid must be {dim}-dimensional")));
        }
        Ok(RegularGrid::new(lo, hi, counts)?)
    }

    /// Christoffel labels on the configured grid, computed in coordinates
    /// that map the grid window onto `[-1, 1]^n`.
    fn support_grid(&self, y: &TruncatedMomentSequence, r: usize) -> CmdResult<(SupportEstimate, RegularGrid)> {
        let grid = self.grid(y.dim())?;
        let rc = self.config.postprocess.christoffel_order.unwrap_or(r);
        if 2 * rc > y.order() {
            return Err(Error::DegreeOverflow { needed: 2 * rc, available: y.order() }.into());
        }
        let scale: Vec<f64> = grid.lo.iter().zip(&grid.hi).map(|(a, b)| 2.0 / (b - a)).collect();
        let shift: Vec<f64> = grid.lo.iter().zip(&grid.hi).zip(&scale).map(|((a, b), s)| -s * (a + b) / 2.0).collect();
        let model = ChristoffelModel::with_transform(y, rc, &DiagonalAffine::new(shift, scale)?)?;
        let est = support_estimate(&model, &grid.points(), self.config.postprocess.eta)?;
        Ok((est, grid))
    }

    fn write_support(&self, dir: &Path, (est, grid): &(SupportEstimate, RegularGrid)) -> CmdResult<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("support.csv"), io::support_to_csv(est))?;
        if self.config.postprocess.pgm && grid.counts.len() == 2 {
            let img = io::support_to_pgm(est, [grid.counts[0], grid.counts[1]])?;
            fs::write(dir.join("support.pgm"), img.to_p5())?;
        }
        Ok(())
    }

    fn support(&self) -> CmdResult<()> {
        if let Some(path) = &self.config.postprocess.moments {
            let path = if path.is_absolute() { path.clone() } else { self.base.join(path) };
            let y = io::read_moments_csv(&path)?;
            let r = self.config.postprocess.christoffel_order.or(self.config.order).unwrap_or(y.order() / 2);
            let est = self.support_grid(&y, r)?;
            self.create_out()?;
            return self.write_support(&self.out, &est);
        }
        let r = self.single_order()?;
        let (w, problem) = self.only_problem(self.prepare(r, r)?)?;
        let solved = self.solve_one(&problem, r);
        let name = if problem.readout_names().contains(&"barycenter") { "barycenter" } else { "plan" };
        let est = match &solved {
            Ok(s) => Some(self.support_grid(&problem.readout(name, s.sequences())?, r)?),
            Err(_) => None,
        };
        self.create_out()?;
        let failure = self.write_order(&self.out, &problem, r, &solved, w.as_deref())?;
        if let Some(est) = est {
            self.write_support(&self.out, &est)?;
        }
        failure.map_or(Ok(()), Err)
    }

    fn export_sdpa(&self) -> CmdResult<()> {
        let r = self.single_order()?;
        let (_, problem) = self.only_problem(self.prepare(r, r)?)?;
        // Quadratic objectives are exported linearized at the starting point.
        let problem = match &problem.objective {
            Objective::Linear(_) => problem,
            Objective::Quadratic(_) => {
                let init: Vec<TruncatedMomentSequence> = problem
                    .initial
                    .iter()
                    .zip(&problem.variables)
                    .map(|(s, v)| s.clone().unwrap_or_else(|| TruncatedMomentSequence::zeros(v.dim(), 0)))
                    .collect();
                problem.with_objective(Objective::Linear(gw_linearize(&problem, &init)?))
            }
        };
        let asm = assemble(&problem, r, &self.config.relaxation_options())?;
        self.create_out()?;
        let mut file = fs::File::create(self.out.join("problem.dat-s"))?;
        export_sdpa(&asm.program, &mut file)?;
        Ok(())
    }
}

fn merge(a: Option<Failure>, b: Option<Failure>) -> Option<Failure> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.exit_code() < x.exit_code() { y } else { x }),
        (x, y) => x.or(y),
    }
}

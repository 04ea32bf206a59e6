mod common;

use common::{assert_same_program, parse_sdpa, rebuild};
use momentot::conic::{
    export_sdpa, solve, to_sdpa_string, BlockBuilder, ConeKind, ConicProgram, SolveStatus, SolverOptions,
};
use momentot::formulations::{build_wp_even, GeneralizedMomentProblem};
use momentot::moments::TruncatedMomentSequence;
use momentot::polyalg::SemialgebraicSet;
use momentot::relaxation::{assemble, solve_order, RelaxationOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lower_bound(p: &mut ConicProgram, var: usize, coef: f64, lo: f64) {
    let mut b = BlockBuilder::new(ConeKind::Nonneg, 1, "lb");
    b.add(var, 0, 0, coef);
    b.add_constant(0, 0, -lo);
    p.add_block(b.build());
}

#[test]
fn two_by_two_sdp() {
    // min y s.t. [[1, y], [y, 1]] psd: optimum -1.
    let mut p = ConicProgram::new(1);
    p.objective[0] = 1.0;
    let mut b = BlockBuilder::new(ConeKind::Psd, 2, "m");
    b.add_constant(0, 0, 1.0);
    b.add_constant(1, 1, 1.0);
    b.add(0, 0, 1, 1.0);
    p.add_block(b.build());
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::Optimal, "{:?}", s.report);
    assert!((s.y[0] + 1.0).abs() < 1e-7, "{}", s.y[0]);
    assert!(s.report.min_block_eigenvalue > -1e-7);
}

#[test]
fn small_lp_with_equality() {
    // min y0 + 2 y1 s.t. y0 + y1 = 3, y0 <= 2 (as -y0 >= -2), y1 >= 0: optimum 2 + 2 = 4.
    let mut p = ConicProgram::new(2);
    p.objective = vec![1.0, 2.0];
    p.add_equality(vec![(0, 1.0), (1, 1.0)], 3.0);
    lower_bound(&mut p, 0, -1.0, -2.0);
    lower_bound(&mut p, 1, 1.0, 0.0);
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::Optimal, "{:?}", s.report);
    assert!((p.objective_value(&s.y) - 4.0).abs() < 1e-7);
    assert!(s.report.max_equality_residual < 1e-12);
}

#[test]
fn infeasible_lp() {
    let mut p = ConicProgram::new(1);
    p.objective[0] = 1.0;
    lower_bound(&mut p, 0, 1.0, 1.0);
    lower_bound(&mut p, 0, -1.0, 0.0);
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::PrimalInfeasible, "{:?}", s.report.message);
}

#[test]
fn unbounded_lp() {
    let mut p = ConicProgram::new(1);
    p.objective[0] = -1.0;
    lower_bound(&mut p, 0, 1.0, 0.0);
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::DualInfeasible, "{:?}", s.report.message);
}

fn sum_bound(objective: Vec<f64>) -> ConicProgram {
    // y0 + y1 >= 1: the direction (1, -1) leaves the block unchanged.
    let mut p = ConicProgram::new(2);
    p.objective = objective;
    let mut b = BlockBuilder::new(ConeKind::Nonneg, 1, "sum");
    b.add(0, 0, 0, 1.0);
    b.add(1, 0, 0, 1.0);
    b.add_constant(0, 0, -1.0);
    p.add_block(b.build());
    p
}

#[test]
fn lineality_directions_are_projected_out() {
    let p = sum_bound(vec![1.0, 1.0]);
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::Optimal, "{:?}", s.report.message);
    assert!((p.objective_value(&s.y) - 1.0).abs() < 1e-7);
    assert!(s.y.iter().all(|v| v.is_finite() && v.abs() < 10.0));

    let s = solve(&sum_bound(vec![1.0, -1.0]), &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::DualInfeasible);
}

#[test]
fn inconsistent_equalities() {
    let mut p = ConicProgram::new(1);
    p.add_equality(vec![(0, 1.0)], 1.0);
    p.add_equality(vec![(0, 1.0)], 2.0);
    let s = solve(&p, &SolverOptions::default());
    assert_eq!(s.report.status, SolveStatus::PrimalInfeasible);
    let _ = to_sdpa_string(&p);
}

#[test]
fn trivial_examples() {
    // min t s.t. [[t, 1], [1, t]] psd.
    let mut p = ConicProgram::new(1);
    p.objective[0] = 1.0;
    let mut b = BlockBuilder::new(ConeKind::Psd, 2, "t");
    b.add(0, 0, 0, 1.0);
    b.add(0, 1, 1, 1.0);
    b.add_constant(0, 1, 1.0);
    p.add_block(b.build());
    let s = solve(&p, &SolverOptions::default());
    assert!(s.report.status.is_success());
    assert!((s.y[0] - 1.0).abs() < 1e-7);

    // min c z, z >= 0, z = 3.
    for c in [2.0, -0.5] {
        let mut p = ConicProgram::new(1);
        p.objective[0] = c;
        p.add_equality(vec![(0, 1.0)], 3.0);
        lower_bound(&mut p, 0, 1.0, 0.0);
        let s = solve(&p, &SolverOptions::default());
        assert!(s.report.status.is_success());
        assert!((p.objective_value(&s.y) - 3.0 * c).abs() < 1e-7);
    }
}

#[test]
fn empty_objective_line_is_zero() {
    let mut p = ConicProgram::new(3);
    lower_bound(&mut p, 1, 1.0, 0.0);
    let s = to_sdpa_string(&p);
    let line = s.lines().nth(3).unwrap();
    assert!(line.split_whitespace().all(|t| t.parse::<f64>().unwrap() == 0.0), "{line}");
    assert_eq!(line.split_whitespace().count(), 3);
}

fn w2_dirac_program() -> (momentot::relaxation::Assembly, GeneralizedMomentProblem) {
    let set = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let g =
        build_wp_even(2, &TruncatedMomentSequence::dirac(&[0.0], 2), &TruncatedMomentSequence::dirac(&[0.6], 2), &set)
            .unwrap();
    (assemble(&g, 1, &RelaxationOptions::default()).unwrap(), g)
}

#[test]
fn w2_dirac_program_optimum() {
    let (asm, g) = w2_dirac_program();
    let s = solve(&asm.program, &SolverOptions::default());
    assert!(s.report.status.is_success(), "{:?}", s.report.status);
    assert!((asm.program.objective_value(&s.y) - 0.36).abs() < 1e-6);
    let res = solve_order(&g, 1, &RelaxationOptions::default()).unwrap();
    assert!((res.rho - 0.36).abs() < 1e-6);
}

#[test]
fn sdpa_round_trip_of_w2_program() {
    let (asm, _) = w2_dirac_program();
    let text = to_sdpa_string(&asm.program);
    assert_eq!(text, to_sdpa_string(&asm.program));
    let mut buf = Vec::new();
    export_sdpa(&asm.program, &mut buf).unwrap();
    assert_eq!(buf, text.as_bytes());

    let parsed = parse_sdpa(&text);
    let back = rebuild(&parsed, !asm.program.equalities.is_empty());
    assert_same_program(&asm.program, &back).unwrap();

    let a = solve(&asm.program, &SolverOptions::default());
    let b = solve(&back, &SolverOptions::default());
    assert!(b.report.status.is_success());
    let off = asm.program.objective_offset;
    assert!((asm.program.objective_value(&a.y) - (back.objective_value(&b.y) + off)).abs() < 1e-6);
}

/// Random LMI program with a known strictly feasible point `y*` and a known
/// dual-feasible point, so the optimum is finite and at most `c . y*`.
fn random_program(seed: u64) -> (ConicProgram, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..6);
    let ystar: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut p = ConicProgram::new(m);
    let mut c = vec![0.0; m];
    for k in 0..rng.gen_range(1..4) {
        let n = rng.gen_range(1..5);
        let kind = if n > 1 && rng.gen_bool(0.7) { ConeKind::Psd } else { ConeKind::Nonneg };
        let mut b = BlockBuilder::new(kind, n, format!("r{k}"));
        let mut total = DMatrix::<f64>::zeros(n, n);
        // Dual point for this block: diagonal for Nonneg, G G^T + I for Psd.
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let z = match kind {
            ConeKind::Psd => &g * g.transpose() + DMatrix::identity(n, n),
            ConeKind::Nonneg => DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0))),
        };
        for var in 0..m {
            for i in 0..n {
                for j in i..n {
                    if kind == ConeKind::Nonneg && i != j {
                        continue;
                    }
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    b.add(var, i, j, v);
                    total[(i, j)] += v * ystar[var];
                    let sym = if i == j { z[(i, i)] } else { 2.0 * z[(i, j)] };
                    c[var] += v * sym;
                }
            }
        }
        // Constant so that F(y*) = S, S positive definite.
        let h = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = match kind {
            ConeKind::Psd => &h * h.transpose() + DMatrix::identity(n, n) * 0.5,
            ConeKind::Nonneg => DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0))),
        };
        for i in 0..n {
            for j in i..n {
                if kind == ConeKind::Nonneg && i != j {
                    continue;
                }
                b.add_constant(i, j, s[(i, j)] - total[(i, j)]);
            }
        }
        p.add_block(b.build());
    }
    if rng.gen_bool(0.5) {
        let terms: Vec<(usize, f64)> = (0..m).map(|k| (k, rng.gen_range(-1.0..1.0))).collect();
        let lam: f64 = rng.gen_range(-1.0..1.0);
        let rhs = terms.iter().map(|&(k, a)| a * ystar[k]).sum();
        for &(k, a) in &terms {
            c[k] += lam * a;
        }
        p.add_equality(terms, rhs);
    }
    p.objective = c;
    (p, ystar)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_feasible_programs(seed in any::<u64>()) {
        let (p, ystar) = random_program(seed);
        let opt = SolverOptions::default();
        let s = solve(&p, &opt);
        prop_assert!(s.report.status.is_success(), "{:?} {}", s.report.status, s.report.message);
        let scale = 1.0 + p.objective_value(&ystar).abs();
        prop_assert!(p.objective_value(&s.y) <= p.objective_value(&ystar) + 1e-6 * scale);
        let bnorm = p.equalities.iter().map(|e| e.rhs.abs()).fold(1.0, f64::max);
        prop_assert!(s.report.max_equality_residual <= 1e-6 * bnorm);
        for b in &p.blocks {
            let norm = b.evaluate(&s.y).norm().max(1.0);
            prop_assert!(b.min_eigenvalue(&s.y) >= -1e-6 * norm);
        }
    }

    #[test]
    fn solver_is_deterministic(seed in any::<u64>()) {
        let (p, _) = random_program(seed);
        let opt = SolverOptions::default();
        let a = solve(&p, &opt);
        let b = solve(&p, &opt);
        prop_assert_eq!(
            a.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(format!("{:?}", a.report), format!("{:?}", b.report));
    }

    #[test]
    fn sdpa_round_trip_is_exact(seed in any::<u64>()) {
        let (p, _) = random_program(seed);
        let back = rebuild(&parse_sdpa(&to_sdpa_string(&p)), !p.equalities.is_empty());
        prop_assert_eq!(assert_same_program(&p, &back), Ok(()));
    }
}

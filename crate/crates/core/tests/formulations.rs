use momentot::formulations::*;
use momentot::moments::*;
use momentot::polyalg::*;
use momentot::relaxation::*;
use proptest::prelude::*;

fn unit_box(n: usize) -> SemialgebraicSet {
    SemialgebraicSet::boxed(&vec![-1.0; n], &vec![1.0; n]).unwrap()
}

fn dirac(a: &[f64], order: usize) -> TruncatedMomentSequence {
    TruncatedMomentSequence::dirac(a, order)
}

fn rho(g: &GeneralizedMomentProblem, r: usize) -> f64 {
    solve_order(g, r, &RelaxationOptions::default()).unwrap().rho
}

/// Moments, in the plan's normalized coordinates, of a point cloud given
/// in original coordinates.
fn plan_moments(v: &MeasureVariable, pts: &[Vec<f64>], w: &[f64], order: usize) -> TruncatedMomentSequence {
    let fwd = v.to_original.inverse();
    let mapped: Vec<Vec<f64>> = pts.iter().map(|p| fwd.apply(p)).collect();
    TruncatedMomentSequence::from_points(&mapped, w, order).unwrap()
}

#[test]
fn multimarginal_dirac_pair() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let cost = Polynomial::parse("x1^2 - 2*x1*x2 + x2^2", 2).unwrap();
    let g = build_multimarginal(&cost, &[dirac(&[0.2], 2), dirac(&[0.9], 2)], &[s.clone(), s]).unwrap();
    assert!((rho(&g, 1) - 0.49).abs() < 1e-7);
}

#[test]
fn constant_cost_gives_unit_value() {
    let s = unit_box(1);
    let mu = descriptor_moments(&MeasureDescriptor::ClosedForm(vec![Univariate::Uniform { lo: -1.0, hi: 1.0 }]), &s, 4)
        .unwrap();
    let nu = TruncatedMomentSequence::from_points(&[vec![-0.5], vec![0.5]], &[0.3, 0.7], 4).unwrap();
    let g = build_multimarginal(&Polynomial::constant(2, 1.0), &[mu, nu], &[s.clone(), s]).unwrap();
    assert!((rho(&g, 2) - 1.0).abs() < 1e-7);
}

#[test]
fn identical_uniform_marginals_cost_nothing() {
    let s = SemialgebraicSet::boxed(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let u = Univariate::Uniform { lo: 0.0, hi: 1.0 };
    let mu = descriptor_moments(&MeasureDescriptor::ClosedForm(vec![u.clone(), u]), &s, 4).unwrap();
    let g = build_wp_even(2, &mu, &mu, &s).unwrap();
    let v = rho(&g, 2);
    assert!(v.abs() < 1e-7, "{v}");
}

#[test]
fn wp_even_examples() {
    let s = SemialgebraicSet::boxed(&[-1.0], &[1.0]).unwrap();
    let g = build_wp_even(2, &dirac(&[0.0], 2), &dirac(&[0.6], 2), &s).unwrap();
    assert!((rho(&g, 1) - 0.36).abs() < 1e-7);
    assert!(matches!(build_wp_even(3, &dirac(&[0.0], 2), &dirac(&[0.6], 2), &s), Err(momentot::Error::OddPower(3))));
    assert!(build_wp_odd(2, &dirac(&[0.0], 2), &dirac(&[0.6], 2), &s).is_err());
}

#[test]
fn wp_even_coefficients() {
    // sum_i sum_k C(p,k) (-1)^k on index (k e_i, (p-k) e_i)
    let s = unit_box(2);
    let g = build_wp_even(4, &dirac(&[0.0, 0.0], 4), &dirac(&[0.0, 0.0], 4), &s).unwrap();
    let Objective::Linear(f) = &g.objective else { panic!("linear objective expected") };
    // The unit box normalizes by 1/sqrt(2) per axis, scaling every degree-4 term by 4.
    let coef = |e: [u32; 4]| f.terms.iter().find(|t| t.alpha.exponents() == e).map_or(0.0, |t| t.coef);
    for (e, c) in
        [([4, 0, 0, 0], 1.0), ([3, 0, 1, 0], -4.0), ([2, 0, 2, 0], 6.0), ([1, 0, 3, 0], -4.0), ([0, 0, 4, 0], 1.0)]
    {
        assert!((coef(e) - 4.0 * c).abs() < 1e-12, "{e:?}: {}", coef(e));
    }
    assert_eq!(f.terms.len(), 10);
}

#[test]
fn wp_odd_block_count() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let g = build_wp_odd(1, &dirac(&[0.0], 4), &dirac(&[0.4], 4), &s).unwrap();
    assert_eq!(g.variables.len(), 2);
    for v in &g.variables {
        // Ball, four box sides, and the sign inequality.
        assert_eq!(v.support.inequalities().len(), 6);
    }
    assert!((rho(&g, 2) - 0.4).abs() < 1e-7);
}

#[test]
fn piecewise_single_piece_matches_multimarginal() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let mu = descriptor_moments(&MeasureDescriptor::ClosedForm(vec![Univariate::Uniform { lo: 0.0, hi: 1.0 }]), &s, 6)
        .unwrap();
    let nu = TruncatedMomentSequence::from_points(&[vec![0.2], vec![0.8]], &[0.5, 0.5], 6).unwrap();
    let cost = Polynomial::parse("x1^2 - 2*x1*x2 + x2^2", 2).unwrap();
    let ms = [mu, nu];
    let sets = [s.clone(), s];
    let a = build_multimarginal(&cost, &ms, &sets).unwrap();
    let b = build_piecewise(&[CostPiece { cost, region: vec![] }], &ms, &sets).unwrap();
    let (ra, rb) = (rho(&a, 2), rho(&b, 2));
    assert!((ra - rb).abs() < 1e-7, "{ra} vs {rb}");
}

#[test]
fn piecewise_absolute_value_matches_split_formulation() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let mu = descriptor_moments(&MeasureDescriptor::ClosedForm(vec![Univariate::Uniform { lo: 0.0, hi: 1.0 }]), &s, 6)
        .unwrap();
    let nu = TruncatedMomentSequence::from_points(&[vec![0.0], vec![1.0]], &[0.5, 0.5], 6).unwrap();
    let d = Polynomial::parse("x1 - x2", 2).unwrap();
    let pieces = [
        CostPiece { cost: d.clone(), region: vec![d.clone()] },
        CostPiece { cost: d.scale(-1.0), region: vec![d.scale(-1.0)] },
    ];
    let a = build_piecewise(&pieces, &[mu.clone(), nu.clone()], &[s.clone(), s.clone()]).unwrap();
    let b = build_wp_odd(1, &mu, &nu, &s).unwrap();
    let (ra, rb) = (rho(&a, 2), rho(&b, 2));
    assert!((ra - rb).abs() < 1e-6, "{ra} vs {rb}");
}

#[test]
fn piecewise_positive_part() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let d = Polynomial::parse("x1 - x2", 2).unwrap();
    let pieces = [
        CostPiece { cost: d.clone(), region: vec![d.clone()] },
        CostPiece { cost: Polynomial::zero(2), region: vec![d.scale(-1.0)] },
    ];
    let g = build_piecewise(&pieces, &[dirac(&[1.0], 2), dirac(&[0.0], 2)], &[s.clone(), s]).unwrap();
    assert!((rho(&g, 1) - 1.0).abs() < 1e-7);
    assert!(build_piecewise(&[], &[dirac(&[1.0], 2)], &[unit_box(1)]).is_err());
}

#[test]
fn barycenter_of_two_diracs() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let (a, b) = (0.1, 0.7);
    let g = build_barycenter_wp(2, &[dirac(&[a], 2), dirac(&[b], 2)], &[0.5, 0.5], &s).unwrap();
    let res = solve_order(&g, 1, &RelaxationOptions::default()).unwrap();
    assert!((res.rho - (a - b) * (a - b) / 4.0).abs() < 1e-7);
    let bar = g.readout("barycenter", &res.sequences).unwrap();
    let mid = (a + b) / 2.0;
    // Minimizers are only determined to about the square root of the gap tolerance.
    assert!((bar.values()[1] - mid).abs() < 1e-4);
    assert!((bar.values()[2] - mid * mid).abs() < 1e-4);
}

#[test]
fn barycenter_of_one_measure_is_itself() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let mu = TruncatedMomentSequence::from_points(&[vec![0.2], vec![0.5], vec![0.9]], &[0.2, 0.5, 0.3], 4).unwrap();
    let g = build_barycenter_wp(2, std::slice::from_ref(&mu), &[1.0], &s).unwrap();
    let res = solve_order(&g, 2, &RelaxationOptions::default()).unwrap();
    assert!(res.rho.abs() < 1e-7);
    let bar = g.readout("barycenter", &res.sequences).unwrap();
    assert!(bar.max_abs_diff(&mu).unwrap() < 1e-4);
    assert!(build_barycenter_wp(2, &[mu.clone(), mu], &[0.6, 0.6], &s).is_err());
}

#[test]
fn marginal_mass_is_checked() {
    let s = unit_box(1);
    let half = TruncatedMomentSequence::from_values(1, 2, vec![0.5, 0.0, 0.1]).unwrap();
    assert!(build_wp_even(2, &half, &dirac(&[0.0], 2), &s).is_err());
}

#[test]
fn swapping_marginals_keeps_value() {
    let s = SemialgebraicSet::boxed(&[0.0], &[1.0]).unwrap();
    let mu = descriptor_moments(
        &MeasureDescriptor::ClosedForm(vec![Univariate::Beta { a: 2.0, b: 3.0, lo: 0.0, hi: 1.0 }]),
        &s,
        6,
    )
    .unwrap();
    let nu = TruncatedMomentSequence::from_points(&[vec![0.1], vec![0.6], vec![0.8]], &[0.3, 0.3, 0.4], 6).unwrap();
    let tol = 2.0 * 1e-8 * 10.0;
    for p in [1u32, 2] {
        let build = |a: &TruncatedMomentSequence, b: &TruncatedMomentSequence| {
            if p % 2 == 0 { build_wp_even(p, a, b, &s) } else { build_wp_odd(p, a, b, &s) }.unwrap()
        };
        let (x, y) = (rho(&build(&mu, &nu), 2), rho(&build(&nu, &mu), 2));
        assert!((x - y).abs() <= tol, "p={p}: {x} vs {y}");
    }
}

#[test]
fn gw_linearize_single_term() {
    let s = unit_box(1);
    let mut g = build_gw_even(2, &GwCost::Lq(2), &GwCost::Lq(2), &dirac(&[0.0], 4), &dirac(&[0.0], 4), &s, &s).unwrap();
    let (l, r) = (MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1]));
    g.objective = Objective::Quadratic(QuadraticMomentFunctional {
        terms: vec![QuadraticTerm { var: 0, left: l.clone(), right: r.clone(), coef: 1.0 }],
    });
    let prev = TruncatedMomentSequence::from_fn(2, 2, |a| if *a == r { 2.0 } else { 0.0 });
    let f = gw_linearize(&g, &[prev]).unwrap();
    assert_eq!(f.terms, vec![LinearTerm { var: 0, alpha: l, coef: 2.0 }]);
}

#[test]
fn gw_requires_even_power() {
    let s = unit_box(1);
    let d = dirac(&[0.0], 4);
    assert!(build_gw_even(3, &GwCost::Lq(2), &GwCost::Lq(2), &d, &d, &s, &s).is_err());
    assert!(build_gw_even(2, &GwCost::Lq(1), &GwCost::Lq(2), &d, &d, &s, &s).is_err());
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wp_even_on_product_dirac(d in 1usize..=3, p in prop::sample::select(vec![2u32, 4]), seed in point(6)) {
        let (a, b) = (seed[..d].to_vec(), seed[3..3 + d].to_vec());
        let g = build_wp_even(p, &dirac(&a, p as usize), &dirac(&b, p as usize), &unit_box(d)).unwrap();
        let ab: Vec<f64> = a.iter().chain(&b).copied().collect();
        let y = plan_moments(&g.variables[0], &[ab], &[1.0], p as usize);
        let want: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(p as i32)).sum();
        let got = g.objective_value(&[y]).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn wp_odd_split_identity(
        d in 1usize..=2,
        p in prop::sample::select(vec![1u32, 3]),
        pairs in prop::collection::vec((point(2), point(2), 0.1f64..1.0), 1..8),
    ) {
        let total: f64 = pairs.iter().map(|t| t.2).sum();
        let coupling: Vec<(Vec<f64>, f64)> = pairs
            .iter()
            .map(|(x, y, w)| (x[..d].iter().chain(&y[..d]).copied().collect(), w / total))
            .collect();
        let mom = |pts: &[(Vec<f64>, f64)]| {
            let (p, w): (Vec<Vec<f64>>, Vec<f64>) = pts.iter().cloned().unzip();
            TruncatedMomentSequence::from_points(&p, &w, 4).unwrap()
        };
        let set = unit_box(d);
        let origin = dirac(&vec![0.0; d], 4);
        let g = build_wp_odd(p, &origin, &origin, &set).unwrap();
        // Pieces come as (+, -) per coordinate: x_i >= y_i goes to +, the rest to -.
        let mut seqs = Vec::new();
        for i in 0..d {
            for plus in [true, false] {
                let part: Vec<(Vec<f64>, f64)> = coupling
                    .iter()
                    .filter(|(z, _)| (z[i] >= z[d + i]) == plus)
                    .map(|(z, w)| (g.variables[0].to_original.inverse().apply(z), *w))
                    .collect();
                seqs.push(if part.is_empty() {
                    TruncatedMomentSequence::zeros(2 * d, 4)
                } else {
                    mom(&part)
                });
            }
        }
        let want: f64 = coupling
            .iter()
            .map(|(z, w)| w * (0..d).map(|i| (z[i] - z[d + i]).abs().powi(p as i32)).sum::<f64>())
            .sum();
        let got = g.objective_value(&seqs).unwrap();
        prop_assert!((got - want).abs() <= 1e-10, "{} vs {}", got, want);
    }

    #[test]
    fn gw_linearize_freezes_dirac(z in point(4), w in point(4)) {
        let set = unit_box(2);
        let d = dirac(&[0.0, 0.0], 4);
        let g = build_gw_even(2, &GwCost::Lq(2), &GwCost::Lq(2), &d, &d, &set, &set).unwrap();
        let v = &g.variables[0];
        let to_norm = v.to_original.inverse();
        let f = gw_linearize(&g, &[dirac(&to_norm.apply(&z), 4)]).unwrap();
        let got = f.evaluate(&[dirac(&to_norm.apply(&w), 4)]).unwrap();
        // Plan variables are ordered (x, y); the frozen copy is (x', y').
        let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| (s - t) * (s - t)).sum::<f64>();
        let want = (sq(&w[..2], &z[..2]) - sq(&w[2..], &z[2..])).powi(2);
        prop_assert!((got - want).abs() <= 1e-10 * want.max(1.0), "{} vs {}", got, want);
    }
}

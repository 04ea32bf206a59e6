use momentot::formulations::*;
use momentot::moments::*;
use momentot::polyalg::*;

fn interval(lo: f64, hi: f64) -> SemialgebraicSet {
    SemialgebraicSet::boxed(&[lo], &[hi]).unwrap()
}

fn atoms(xs: &[f64], order: usize) -> TruncatedMomentSequence {
    let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    TruncatedMomentSequence::from_points(&pts, &vec![1.0 / xs.len() as f64; xs.len()], order).unwrap()
}

/// Moments, in the variable's normalized coordinates, of a cloud given in
/// original coordinates.
fn normalized(v: &MeasureVariable, pts: &[Vec<f64>], w: &[f64], order: usize) -> TruncatedMomentSequence {
    let fwd = v.to_original.inverse();
    let mapped: Vec<Vec<f64>> = pts.iter().map(|p| fwd.apply(p)).collect();
    TruncatedMomentSequence::from_points(&mapped, w, order).unwrap()
}

/// GW_{2,2} of a discrete coupling, summed directly over pairs of atoms.
fn gw_direct(plan: &[((f64, f64), f64)]) -> f64 {
    let mut s = 0.0;
    for &((x, y), p) in plan {
        for &((xp, yp), q) in plan {
            s += p * q * ((x - xp).powi(2) - (y - yp).powi(2)).powi(2);
        }
    }
    s
}

/// Couplings of {0, 1} and {0, 2} with uniform marginals: mass `a` on the
/// monotone pairs and `1/2 - a` on the crossed ones.
fn two_atom_plan(a: f64) -> Vec<((f64, f64), f64)> {
    vec![((0.0, 0.0), a), ((1.0, 2.0), a), ((0.0, 2.0), 0.5 - a), ((1.0, 0.0), 0.5 - a)]
}

fn brute_force_two_atoms() -> f64 {
    (0..=5000).map(|k| gw_direct(&two_atom_plan(0.5 * k as f64 / 5000.0))).fold(f64::INFINITY, f64::min)
}

fn two_atom_problem() -> GeneralizedMomentProblem {
    build_gw_even(
        2,
        &GwCost::Lq(2),
        &GwCost::Lq(2),
        &atoms(&[0.0, 1.0], 8),
        &atoms(&[0.0, 2.0], 8),
        &interval(0.0, 1.0),
        &interval(0.0, 2.0),
    )
    .unwrap()
}

fn plan_init(g: &GeneralizedMomentProblem, a: f64) -> TruncatedMomentSequence {
    let plan = two_atom_plan(a);
    let pts: Vec<Vec<f64>> = plan.iter().map(|((x, y), _)| vec![*x, *y]).collect();
    let w: Vec<f64> = plan.iter().map(|(_, p)| *p).collect();
    normalized(&g.variables[0], &pts, &w, 4)
}

#[test]
fn brute_force_oracle_value() {
    let best = brute_force_two_atoms();
    assert!((best - 4.5).abs() < 1e-12, "{best}");
    // The product coupling is strictly worse.
    assert!(gw_direct(&two_atom_plan(0.25)) > best + 1.0);
}

#[test]
fn quadratic_objective_matches_direct_sum() {
    let g = two_atom_problem();
    for a in [0.0, 0.1, 0.25, 0.3, 0.5] {
        let y = plan_init(&g, a);
        let got = g.objective_value(std::slice::from_ref(&y)).unwrap();
        let want = gw_direct(&two_atom_plan(a));
        assert!((got - want).abs() < 1e-10 * want.max(1.0), "a={a}: {got} vs {want}");
    }
}

#[test]
fn fixed_point_reaches_two_atom_optimum() {
    let g = two_atom_problem();
    // The product coupling is a symmetric stationary point, so start off it.
    let init = plan_init(&g, 0.3);
    let out = gw_fixed_point(&g, 2, Some(&[init]), &FixedPointOptions::default()).unwrap();
    let want = brute_force_two_atoms();
    assert!((out.best_value - want).abs() <= 1e-6, "{} vs {want}", out.best_value);
    assert!(out.converged);
    // At the fixed point the linearized value equals the quadratic one.
    let last = out.trace.last().unwrap();
    assert!((last.linearized - last.quadratic).abs() <= 1e-6, "{last:?}");
    // The best iterate is reported, whatever the last one was.
    let min = out.trace.iter().map(|t| t.quadratic).fold(f64::INFINITY, f64::min);
    assert_eq!(out.best_value, min);
}

#[test]
fn equal_diracs_converge_immediately() {
    let s = interval(0.0, 1.0);
    let d = TruncatedMomentSequence::dirac(&[0.3], 8);
    let g = build_gw_even(2, &GwCost::Lq(2), &GwCost::Lq(2), &d, &d, &s, &s).unwrap();
    let out = gw_fixed_point(&g, 2, None, &FixedPointOptions::default()).unwrap();
    assert_eq!(out.trace.len(), 1);
    assert!(out.converged);
    assert!(out.best_value.abs() < 1e-8, "{}", out.best_value);
}

#[test]
fn fixed_point_validates_inputs() {
    let g = two_atom_problem();
    assert!(matches!(
        gw_fixed_point(&g, 1, None, &FixedPointOptions::default()),
        Err(momentot::Error::OrderTooLow { .. })
    ));
    let bad = FixedPointOptions { max_iter: 0, ..Default::default() };
    assert!(gw_fixed_point(&g, 2, None, &bad).is_err());
    let bad = FixedPointOptions { damping: 1.0, ..Default::default() };
    assert!(gw_fixed_point(&g, 2, None, &bad).is_err());
    let s = interval(0.0, 1.0);
    let w = build_wp_even(2, &atoms(&[0.0], 4), &atoms(&[1.0], 4), &s).unwrap();
    assert!(gw_fixed_point(&w, 2, None, &FixedPointOptions::default()).is_err());
}

#[test]
fn relative_change_rule() {
    assert_eq!(relative_change(2.0, 1.0), 0.5);
    assert_eq!(relative_change(0.5, 0.25), 0.25);
    assert_eq!(relative_change(0.0, 0.0), 0.0);
}

fn central_moment(y: &TruncatedMomentSequence, k: u32) -> f64 {
    let m = y.get(&MultiIndex::new(vec![1])).unwrap();
    (0..=k)
        .map(|j| {
            let binom = (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64);
            binom * y.get(&MultiIndex::new(vec![j])).unwrap() * (-m).powi((k - j) as i32)
        })
        .sum()
}

#[test]
fn gw_barycenter_with_degenerate_weights() {
    // The barycenter domain must hold an isometric copy of either input.
    let x = interval(0.0, 2.0);
    let y1 = interval(0.0, 1.0);
    let y2 = interval(0.0, 2.0);
    let mu1 = atoms(&[0.1, 0.4, 0.5, 0.9], 8);
    let mu2 = atoms(&[0.2, 0.7, 1.8], 8);
    for (w, target) in [([1.0, 0.0], &mu1), ([0.0, 1.0], &mu2)] {
        let g = build_gw_barycenter(&[mu1.clone(), mu2.clone()], &w, &x, &[y1.clone(), y2.clone()]).unwrap();
        // Undamped iterates alternate between two couplings on this input.
        let opts = FixedPointOptions { damping: 0.5, max_iter: 100, ..Default::default() };
        let out = gw_fixed_point(&g, 2, None, &opts).unwrap();
        let bary = g.readout("barycenter", &out.best).unwrap();
        assert!(out.converged && out.best_value.abs() < 1e-6, "{w:?}: {}", out.best_value);
        // GW only sees the measure up to isometry: compare central moments.
        for k in 2..=4 {
            let (a, b) = (central_moment(&bary, k), central_moment(target, k));
            assert!((a - b).abs() < 1e-4, "{w:?} k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn gw_barycenter_weight_errors() {
    let x = interval(0.0, 1.0);
    let mu = atoms(&[0.1, 0.9], 4);
    assert!(build_gw_barycenter(&[mu.clone(), mu.clone()], &[0.6, 0.6], &x, &[x.clone(), x.clone()]).is_err());
    assert!(build_gw_barycenter(std::slice::from_ref(&mu), &[1.0, 0.0], &x, std::slice::from_ref(&x)).is_err());
    assert!(build_gw_barycenter(&[], &[], &x, &[]).is_err());
}

#[test]
fn midpoint_barycenter_of_isometric_pair_is_equidistant() {
    let x = interval(0.0, 1.0);
    let pts = [0.1, 0.25, 0.7];
    let mirrored: Vec<f64> = pts.iter().map(|p| 1.0 - p).collect();
    let (mu1, mu2) = (atoms(&pts, 8), atoms(&mirrored, 8));
    let g = build_gw_barycenter(&[mu1.clone(), mu2.clone()], &[0.5, 0.5], &x, &[x.clone(), x.clone()]).unwrap();
    let opts = FixedPointOptions { damping: 0.5, max_iter: 100, ..Default::default() };
    let out = gw_fixed_point(&g, 2, None, &opts).unwrap();
    let bary = g.readout("barycenter", &out.best).unwrap();
    let gw_to = |mu: &TruncatedMomentSequence| {
        let p = build_gw_even(2, &GwCost::Lq(2), &GwCost::Lq(2), &bary, mu, &x, &x).unwrap();
        gw_fixed_point(&p, 2, None, &opts).unwrap().best_value
    };
    let (d1, d2) = (gw_to(&mu1), gw_to(&mu2));
    assert!((d1 - d2).abs() <= 1e-3, "{d1} vs {d2}");
}

//! Elimination of the equality rows.
//!
//! Every consistent row pins one variable as an affine function of the
//! others, so the interior-point iteration only sees cone constraints and
//! the equalities hold to rounding error.

use std::collections::BTreeMap;

use super::program::{ConicProgram, SymSparse};

/// `y = constant + sum coef * w_k` in terms of the reduced vector `w`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct AffineExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

#[derive(Debug)]
pub(crate) struct Elimination {
    pub reduced_vars: usize,
    pub map: Vec<AffineExpr>,
    pub removed_rows: usize,
}

#[derive(Debug)]
pub(crate) enum PresolveOutcome {
    Reduced(Elimination),
    /// An equality row reduced to `0 = b` with `b` nonzero.
    Inconsistent {
        row: usize,
        residual: f64,
    },
}

const DROP_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-9;

pub(crate) fn eliminate(program: &ConicProgram) -> PresolveOutcome {
    let n = program.num_vars;
    let mut expr: Vec<Option<(f64, BTreeMap<usize, f64>)>> = vec![None; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut removed = 0;
    for (ri, row) in program.equalities.iter().enumerate() {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut rhs = row.rhs;
        let mut scale = row.rhs.abs();
        for &(v, a) in &row.terms {
            scale = scale.max(a.abs());
            match &expr[v] {
                Some((c, terms)) => {
                    rhs -= a * c;
                    for (&k, &b) in terms {
                        *acc.entry(k).or_insert(0.0) += a * b;
                    }
                }
                None => *acc.entry(v).or_insert(0.0) += a,
            }
        }
        let cut = DROP_TOL * acc.values().fold(scale, |m, v| m.max(v.abs()));
        acc.retain(|_, v| v.abs() > cut);
        let Some((&p, &ap)) = acc.iter().fold(None, |best: Option<(&usize, &f64)>, cur| match best {
            Some(b) if b.1.abs() >= cur.1.abs() => Some(b),
            _ => Some(cur),
        }) else {
            if rhs.abs() > CONSISTENCY_TOL * (1.0 + scale) {
                return PresolveOutcome::Inconsistent { row: ri, residual: rhs };
            }
            removed += 1;
            continue;
        };
        let cp = rhs / ap;
        let tp: BTreeMap<usize, f64> = acc.iter().filter(|(&k, _)| k != p).map(|(&k, &a)| (k, -a / ap)).collect();
        for q in std::mem::take(&mut users[p]) {
            let Some((cq, tq)) = expr[q].as_mut() else { continue };
            let Some(b) = tq.remove(&p) else { continue };
            *cq += b * cp;
            for (&k, &t) in &tp {
                let e = tq.entry(k).or_insert(0.0);
                *e += b * t;
                users[k].push(q);
            }
            tq.retain(|_, v| *v != 0.0);
        }
        for &k in tp.keys() {
            users[k].push(p);
        }
        expr[p] = Some((cp, tp));
        removed += 1;
    }
    let mut index = vec![usize::MAX; n];
    let mut m = 0;
    for v in 0..n {
        if expr[v].is_none() {
            index[v] = m;
            m += 1;
        }
    }
    let map = (0..n)
        .map(|v| match &expr[v] {
            None => AffineExpr { constant: 0.0, terms: vec![(index[v], 1.0)] },
            Some((c, t)) => AffineExpr { constant: *c, terms: t.iter().map(|(&k, &a)| (index[k], a)).collect() },
        })
        .collect();
    PresolveOutcome::Reduced(Elimination { reduced_vars: m, map, removed_rows: removed })
}

impl Elimination {
    pub fn expand(&self, w: &[f64]) -> Vec<f64> {
        self.map.iter().map(|e| e.constant + e.terms.iter().map(|&(k, a)| a * w[k]).sum::<f64>()).collect()
    }
}

/// Cone data of the reduced program in solver form.
#[derive(Clone, Debug)]
pub(crate) struct ReducedBlock {
    pub size: usize,
    pub constant: SymSparse,
    pub coefficients: Vec<(usize, SymSparse)>,
}

#[derive(Clone, Debug)]
pub(crate) struct ReducedProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub offset: f64,
    pub blocks: Vec<ReducedBlock>,
}

/// Substitutes the elimination into objective and blocks. LP blocks are
/// split into `1 x 1` semidefinite blocks.
pub(crate) fn reduce(program: &ConicProgram, elim: &Elimination) -> ReducedProgram {
    let m = elim.reduced_vars;
    let mut objective = vec![0.0; m];
    let mut offset = program.objective_offset;
    for (v, &c) in program.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let e = &elim.map[v];
        offset += c * e.constant;
        for &(k, a) in &e.terms {
            objective[k] += c * a;
        }
    }
    let mut blocks = Vec::new();
    for b in &program.blocks {
        let mut constant: Vec<(usize, usize, f64)> = b.constant.entries.clone();
        let mut coefs: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
        for (v, f) in &b.coefficients {
            let e = &elim.map[*v];
            if e.constant != 0.0 {
                constant.extend(f.entries.iter().map(|&(i, j, x)| (i, j, x * e.constant)));
            }
            for &(k, a) in &e.terms {
                coefs.entry(k).or_default().extend(f.entries.iter().map(|&(i, j, x)| (i, j, x * a)));
            }
        }
        let clean = |s: SymSparse| -> SymSparse {
            let cut = 1e-14 * s.max_abs();
            SymSparse { entries: s.entries.into_iter().filter(|e| e.2.abs() > cut).collect() }
        };
        let constant = clean(SymSparse::from_entries(constant));
        let coefficients: Vec<(usize, SymSparse)> = coefs
            .into_iter()
            .map(|(k, e)| (k, clean(SymSparse::from_entries(e))))
            .filter(|(_, s)| !s.is_empty())
            .collect();
        match b.kind {
            super::ConeKind::Psd => blocks.push(ReducedBlock { size: b.size, constant, coefficients }),
            super::ConeKind::Nonneg => {
                for d in 0..b.size {
                    let pick = |s: &SymSparse| SymSparse {
                        entries: s.entries.iter().filter(|e| e.0 == d).map(|e| (0, 0, e.2)).collect(),
                    };
                    blocks.push(ReducedBlock {
                        size: 1,
                        constant: pick(&constant),
                        coefficients: coefficients
                            .iter()
                            .map(|(k, s)| (*k, pick(s)))
                            .filter(|(_, s)| !s.is_empty())
                            .collect(),
                    });
                }
            }
        }
    }
    ReducedProgram { num_vars: m, objective, offset, blocks }
}

/// Outcome of [`remove_lineality`].
pub(crate) enum Lineality {
    /// The block maps are jointly injective.
    None,
    /// `w = basis * u` with `u` the variables of `program`.
    Removed { program: ReducedProgram, basis: nalgebra::DMatrix<f64> },
    /// Some direction leaves every block unchanged and decreases the objective.
    Unbounded,
}

/// Detects directions `d` with `sum d_i G_i = 0` in every block. Such
/// directions make the Schur complement singular; they are projected out
/// when the objective is constant along them.
pub(crate) fn remove_lineality(p: &ReducedProgram) -> Lineality {
    use nalgebra::DMatrix;
    let m = p.num_vars;
    if m == 0 {
        return Lineality::None;
    }
    // Gram matrix of the stacked coefficient maps under the trace inner product.
    let mut g = DMatrix::<f64>::zeros(m, m);
    for b in &p.blocks {
        let mut at: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for (v, f) in &b.coefficients {
            for &(i, j, x) in &f.entries {
                at.entry((i, j)).or_default().push((*v, x));
            }
        }
        for ((i, j), list) in at {
            let w = if i == j { 1.0 } else { 2.0 };
            for &(u, a) in &list {
                for &(v, c) in &list {
                    g[(u, v)] += w * a * c;
                }
            }
        }
    }
    let d: Vec<f64> = (0..m).map(|i| if g[(i, i)] > 0.0 { 1.0 / g[(i, i)].sqrt() } else { 0.0 }).collect();
    let free: Vec<usize> = (0..m).filter(|&i| d[i] == 0.0).collect();
    let used: Vec<usize> = (0..m).filter(|&i| d[i] > 0.0).collect();
    let k = used.len();
    let gs = DMatrix::from_fn(k, k, |a, b| g[(used[a], used[b])] * d[used[a]] * d[used[b]]);
    let tol = 1e-10;
    let regular = match gs.clone().cholesky() {
        Some(ch) => (0..k).all(|i| ch.l_dirty()[(i, i)].powi(2) > tol),
        None => false,
    };
    let cnorm = p.objective.iter().map(|c| c * c).sum::<f64>().sqrt();
    let flat = |c: f64, n: f64| c.abs() <= 1e-8 * cnorm.max(f64::MIN_POSITIVE) * n;
    if free.iter().any(|&i| !flat(p.objective[i], 1.0)) {
        return Lineality::Unbounded;
    }
    if regular && free.is_empty() {
        return Lineality::None;
    }
    // Range basis in the original coordinates: columns D^{-1/2} v for the
    // eigenvectors v of the scaled Gram matrix with nonzero eigenvalue.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    if regular {
        for &i in &used {
            let mut col = vec![0.0; m];
            col[i] = 1.0;
            cols.push(col);
        }
    } else {
        let eig = gs.symmetric_eigen();
        for e in 0..k {
            let v = eig.eigenvectors.column(e);
            let mut col = vec![0.0; m];
            for (a, &i) in used.iter().enumerate() {
                col[i] = v[a] * d[i];
            }
            if eig.eigenvalues[e] > tol {
                cols.push(col);
            } else {
                let n = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                let cd: f64 = col.iter().zip(&p.objective).map(|(x, c)| x * c).sum();
                if !flat(cd, n) {
                    return Lineality::Unbounded;
                }
            }
        }
    }
    let r = cols.len();
    let basis = DMatrix::from_fn(m, r, |i, j| cols[j][i]);
    let objective: Vec<f64> = (0..r).map(|j| (0..m).map(|i| basis[(i, j)] * p.objective[i]).sum()).collect();
    let blocks = p
        .blocks
        .iter()
        .map(|b| {
            let mut coefs: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
            for (v, f) in &b.coefficients {
                for j in 0..r {
                    let a = basis[(*v, j)];
                    if a != 0.0 {
                        coefs.entry(j).or_default().extend(f.entries.iter().map(|&(i, l, x)| (i, l, x * a)));
                    }
                }
            }
            ReducedBlock {
                size: b.size,
                constant: b.constant.clone(),
                coefficients: coefs
                    .into_iter()
                    .map(|(j, e)| (j, SymSparse::from_entries(e)))
                    .filter(|(_, s)| !s.is_empty())
                    .collect(),
            }
        })
        .collect();
    Lineality::Removed { program: ReducedProgram { num_vars: r, objective, offset: p.offset, blocks }, basis }
}

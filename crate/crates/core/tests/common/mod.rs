//! Independent SDPA sparse reader shared by the conic tests and the
//! acceptance harness.

use std::collections::BTreeMap;

use momentot::conic::{BlockBuilder, ConeBlock, ConeKind, ConicProgram, SymSparse};

/// Parsed SDPA sparse data, kept in the format's own terms.
pub struct Sdpa {
    pub m: usize,
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

pub fn parse_sdpa(text: &str) -> Sdpa {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('*') && !l.starts_with('"'));
    let mut next = || lines.next().expect("truncated file");
    let m: usize = next().parse().unwrap();
    let nblk: usize = next().parse().unwrap();
    let block_sizes: Vec<i64> = next().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(block_sizes.len(), nblk);
    let c: Vec<f64> = next().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(c.len(), m);
    let mut entries = Vec::new();
    for l in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        assert_eq!(f.len(), 5, "{l}");
        let e = (
            f[0].parse().unwrap(),
            f[1].parse().unwrap(),
            f[2].parse().unwrap(),
            f[3].parse().unwrap(),
            f[4].parse().unwrap(),
        );
        assert!(e.0 <= m && e.1 >= 1 && e.1 <= nblk && e.2 <= e.3, "{l}");
        entries.push(e);
    }
    Sdpa { m, block_sizes, c, entries }
}

/// Rebuilds a program from SDPA data. The trailing LP block is read back as
/// equalities when the source had any: rows come in (+a, -a) pairs.
pub fn rebuild(s: &Sdpa, has_equalities: bool) -> ConicProgram {
    let mut p = ConicProgram::new(s.m);
    p.objective = s.c.clone();
    let ncone = s.block_sizes.len() - usize::from(has_equalities);
    let mut builders: Vec<BlockBuilder> = s.block_sizes[..ncone]
        .iter()
        .enumerate()
        .map(|(k, &sz)| {
            BlockBuilder::new(
                if sz < 0 { ConeKind::Nonneg } else { ConeKind::Psd },
                sz.unsigned_abs() as usize,
                format!("b{k}"),
            )
        })
        .collect();
    let mut eq: BTreeMap<usize, (Vec<(usize, f64)>, f64)> = BTreeMap::new();
    for &(mat, blk, i, j, v) in &s.entries {
        if blk <= ncone {
            let b = &mut builders[blk - 1];
            if mat == 0 {
                b.add_constant(i - 1, j - 1, -v);
            } else {
                b.add(mat - 1, i - 1, j - 1, v);
            }
        } else if i % 2 == 1 {
            let row = eq.entry(i / 2).or_default();
            if mat == 0 {
                row.1 = v;
            } else {
                row.0.push((mat - 1, v));
            }
        }
    }
    for b in builders {
        p.add_block(b.build());
    }
    for (_, (terms, rhs)) in eq {
        p.add_equality(terms, rhs);
    }
    p
}

fn dense_bits(s: &SymSparse, n: usize) -> Vec<u64> {
    s.to_dense(n).iter().map(|v| v.to_bits()).collect()
}

fn coefficient_bits(b: &ConeBlock) -> Vec<(usize, Vec<u64>)> {
    let mut v: Vec<(usize, Vec<u64>)> =
        b.coefficients.iter().filter(|(_, f)| !f.is_empty()).map(|(k, f)| (*k, dense_bits(f, b.size))).collect();
    v.sort();
    v
}

fn merged_bits(t: &[(usize, f64)]) -> Vec<(usize, u64)> {
    let mut m: BTreeMap<usize, f64> = BTreeMap::new();
    for &(k, v) in t {
        *m.entry(k).or_insert(0.0) += v;
    }
    m.into_iter().filter(|(_, v)| *v != 0.0).map(|(k, v)| (k, v.to_bits())).collect()
}

/// Bit-level comparison of two programs, up to entry order and symmetric
/// duplicates. The objective offset is not part of the format.
pub fn assert_same_program(a: &ConicProgram, b: &ConicProgram) -> Result<(), String> {
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    if a.num_vars != b.num_vars || bits(&a.objective) != bits(&b.objective) {
        return Err("objective differs".into());
    }
    if a.blocks.len() != b.blocks.len() {
        return Err(format!("{} blocks vs {}", a.blocks.len(), b.blocks.len()));
    }
    for (x, y) in a.blocks.iter().zip(&b.blocks) {
        if (x.kind, x.size) != (y.kind, y.size) {
            return Err(format!("block {} changed shape", x.label));
        }
        if dense_bits(&x.constant, x.size) != dense_bits(&y.constant, y.size) {
            return Err(format!("block {} constant differs", x.label));
        }
        if coefficient_bits(x) != coefficient_bits(y) {
            return Err(format!("block {} coefficients differ", x.label));
        }
    }
    if a.equalities.len() != b.equalities.len() {
        return Err(format!("{} equalities vs {}", a.equalities.len(), b.equalities.len()));
    }
    for (k, (x, y)) in a.equalities.iter().zip(&b.equalities).enumerate() {
        if x.rhs.to_bits() != y.rhs.to_bits() || merged_bits(&x.terms) != merged_bits(&y.terms) {
            return Err(format!("equality {k} differs"));
        }
    }
    Ok(())
}

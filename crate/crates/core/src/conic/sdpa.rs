//! Writer for the SDPA sparse format (`.dat-s`).
//!
//! The program is written in SDPA primal form `min c^T x` subject to
//! `sum_i F_i x_i - F_0` in the cone, so the constant matrices are negated.
//! Each equality `a^T y = b` becomes the LP pair `a^T y - b >= 0` and
//! `-a^T y + b >= 0`, appended as a final LP block. The constant objective
//! offset has no place in the format and is dropped.

use std::fmt::Write as _;
use std::io::Write;

use super::program::{ConeKind, ConicProgram};

/// Renders the program as SDPA sparse text.
pub fn to_sdpa_string(program: &ConicProgram) -> String {
    let mut out = String::new();
    let nblk = program.blocks.len() + usize::from(!program.equalities.is_empty());
    writeln!(out, "{}", program.num_vars).unwrap();
    writeln!(out, "{nblk}").unwrap();
    let mut sizes: Vec<String> = program
        .blocks
        .iter()
        .map(|b| match b.kind {
            ConeKind::Psd => b.size.to_string(),
            ConeKind::Nonneg => format!("-{}", b.size),
        })
        .collect();
    if !program.equalities.is_empty() {
        sizes.push(format!("-{}", 2 * program.equalities.len()));
    }
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let c: Vec<String> = program.objective.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", c.join(" ")).unwrap();

    // (matno, block, i, j, value) with 1-based indices.
    let mut entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (k, b) in program.blocks.iter().enumerate() {
        for &(i, j, v) in &b.constant.entries {
            entries.push((0, k + 1, i + 1, j + 1, -v));
        }
        for (var, f) in &b.coefficients {
            for &(i, j, v) in &f.entries {
                entries.push((var + 1, k + 1, i + 1, j + 1, v));
            }
        }
    }
    let eq_block = program.blocks.len() + 1;
    for (r, e) in program.equalities.iter().enumerate() {
        let (lo, hi) = (2 * r + 1, 2 * r + 2);
        if e.rhs != 0.0 {
            entries.push((0, eq_block, lo, lo, e.rhs));
            entries.push((0, eq_block, hi, hi, -e.rhs));
        }
        let mut merged: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for &(v, a) in &e.terms {
            *merged.entry(v).or_insert(0.0) += a;
        }
        for (v, a) in merged {
            if a != 0.0 {
                entries.push((v + 1, eq_block, lo, lo, a));
                entries.push((v + 1, eq_block, hi, hi, -a));
            }
        }
    }
    entries.sort_by_key(|a| (a.0, a.1, a.2, a.3));
    for (m, b, i, j, v) in entries {
        writeln!(out, "{m} {b} {i} {j} {v:.16e}").unwrap();
    }
    out
}

pub fn export_sdpa(program: &ConicProgram, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(to_sdpa_string(program).as_bytes())
}

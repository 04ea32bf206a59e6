use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: total degree first, then the larger
/// exponent of `x1` wins, then `x2`, and so on. With two variables the
/// first few indices are `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The index of the monomial `x_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Concatenates exponent vectors, as for a monomial on a product space.
    pub fn concat(&self, other: &Self) -> Self {
        let mut e = self.0.clone();
        e.extend_from_slice(&other.0);
        Self(e)
    }

    /// Exponents `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self(self.0[start..start + len].to_vec())
    }

    /// Places this index inside a zero index of dimension `total` at `offset`.
    pub fn embed(&self, total: usize, offset: usize) -> Self {
        let mut e = vec![0; total];
        e[offset..offset + self.dim()].copy_from_slice(&self.0);
        Self(e)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Evaluates `x^alpha`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).filter(|(&e, _)| e > 0).map(|(&e, &xi)| xi.powi(e as i32)).product()
    }

    /// Position of this index in the graded-lex enumeration of all indices
    /// of the same dimension. Dense moment vectors are stored in this order.
    pub fn grlex_rank(&self) -> usize {
        let n = self.dim();
        if n == 0 {
            return 0;
        }
        let d = self.degree();
        let mut rank = if d == 0 { 0 } else { binomial(n + d - 1, n) };
        let mut rem = d;
        for i in 0..n {
            let ai = self.0[i] as usize;
            let tail = n - i - 1;
            for v in (ai + 1)..=rem {
                rank += compositions(rem - v, tail);
            }
            rem -= ai;
        }
        rank
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of exponent vectors of length `parts` summing to `total`.
fn compositions(total: usize, parts: usize) -> usize {
    if parts == 0 {
        usize::from(total == 0)
    } else {
        binomial(total + parts - 1, parts - 1)
    }
}

/// Number of monomials of degree at most `r` in `n` variables, `C(n+r, r)`.
pub fn monomial_count(n: usize, r: usize) -> usize {
    binomial(n + r, r)
}

/// All indices of dimension `n` and degree at most `r`, in graded-lex order.
pub fn enumerate_indices(n: usize, r: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(monomial_count(n, r));
    let mut buf = vec![0u32; n];
    for d in 0..=r {
        fill_degree(&mut buf, 0, d, &mut out);
    }
    out
}

fn fill_degree(buf: &mut [u32], pos: usize, rem: usize, out: &mut Vec<MultiIndex>) {
    let n = buf.len();
    if n == 0 {
        if rem == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        buf[pos] = rem as u32;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for v in (0..=rem).rev() {
        buf[pos] = v as u32;
        fill_degree(buf, pos + 1, rem - v, out);
    }
    buf[pos] = 0;
}

/// Graded-lex index table with a parent pointer per entry, so that all
/// monomials at a point are evaluated with one multiplication each.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    parents: Vec<(usize, usize)>,
}

impl MonomialTable {
    pub fn new(n: usize, degree: usize) -> Self {
        let indices = enumerate_indices(n, degree);
        let parents = indices
            .iter()
            .map(|a| match a.0.iter().position(|&e| e > 0) {
                None => (0, usize::MAX),
                Some(i) => {
                    let mut p = a.0.clone();
                    p[i] -= 1;
                    (MultiIndex(p).grlex_rank(), i)
                }
            })
            .collect();
        Self { n, degree, indices, parents }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Writes `x^alpha` for every index into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for k in 1..self.indices.len() {
            let (p, i) = self.parents[k];
            out[k] = out[p] * x[i];
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order_in_two_variables() {
        let idx = enumerate_indices(2, 1);
        let e: Vec<_> = idx.iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(e, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let idx = enumerate_indices(2, 2);
        assert_eq!(idx[3].exponents(), &[2, 0]);
        assert_eq!(idx[4].exponents(), &[1, 1]);
        assert_eq!(idx[5].exponents(), &[0, 2]);
    }

    #[test]
    fn counts_match_binomials() {
        assert_eq!(enumerate_indices(3, 2).len(), 10);
        assert_eq!(monomial_count(4, 4), 70);
        assert_eq!(enumerate_indices(4, 4).len(), 70);
        assert_eq!(enumerate_indices(1, 0).len(), 1);
    }

    #[test]
    fn rank_matches_position() {
        for n in 1..=4 {
            let idx = enumerate_indices(n, 5);
            for (k, a) in idx.iter().enumerate() {
                assert_eq!(a.grlex_rank(), k, "{a:?}");
            }
            for w in idx.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn table_eval_matches_direct() {
        let t = MonomialTable::new(3, 4);
        let x = [0.3, -1.2, 2.0];
        let v = t.eval(&x);
        for (k, a) in t.indices().iter().enumerate() {
            assert!((v[k] - a.eval(&x)).abs() < 1e-12);
        }
    }
}

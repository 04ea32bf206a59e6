use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DiagonalAffine, MultiIndex};
use crate::error::{Error, Result};

/// Sparse real polynomial in `n` variables, kept free of zero coefficients.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    #[serde(with = "term_list")]
    terms: BTreeMap<MultiIndex, f64>,
}

// Terms are serialized as `[exponents, coefficient]` pairs so that formats
// with string-only map keys can hold them.
mod term_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::polyalg::MultiIndex;

    pub fn serialize<S: Serializer>(terms: &BTreeMap<MultiIndex, f64>, s: S) -> Result<S::Ok, S::Error> {
        terms.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<MultiIndex, f64>, D::Error> {
        Ok(Vec::<(MultiIndex, f64)>::deserialize(d)?.into_iter().filter(|(_, c)| *c != 0.0).collect())
    }
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(MultiIndex::zero(n), c)
    }

    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// The coordinate polynomial `x_i` (0-based).
    pub fn variable(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, i), 1.0)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (a, c) in terms {
            if a.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.dim() });
            }
            p.add_term(a, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert_eq!(alpha.dim(), self.n);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(alpha) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.n);
        }
        Self { n: self.n, terms: self.terms.iter().map(|(a, &c)| (a.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.add(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::constant(self.n, 1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same dimension");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        result
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, &c)| c * a.eval(x)).sum()
    }

    /// Coefficients smaller than `tol` times the largest one are dropped.
    pub fn pruned(&self, tol: f64) -> Self {
        let max = self.max_abs_coefficient();
        Self {
            n: self.n,
            terms: self.terms.iter().filter(|(_, &c)| c.abs() > tol * max).map(|(a, &c)| (a.clone(), c)).collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Re-embeds the polynomial into `total` variables starting at `offset`.
    pub fn lift(&self, total: usize, offset: usize) -> Result<Self> {
        if offset + self.n > total {
            return Err(Error::DimensionMismatch { expected: total, found: offset + self.n });
        }
        Ok(Self { n: total, terms: self.terms.iter().map(|(a, &c)| (a.embed(total, offset), c)).collect() })
    }

    /// `p(t(u))` for a coordinatewise affine map `t`.
    pub fn compose(&self, t: &DiagonalAffine) -> Result<Self> {
        if t.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: t.dim() });
        }
        // Powers of each affine coordinate are shared across terms.
        let maxdeg = self.degree() as u32;
        let powers: Vec<Vec<Self>> = (0..self.n)
            .map(|i| {
                let lin = Self::constant(self.n, t.shift()[i])
                    .add(&Self::variable(self.n, i).scale(t.scale()[i]))
                    .expect("same dimension");
                let mut v = vec![Self::constant(self.n, 1.0)];
                for k in 1..=maxdeg {
                    let next = v[k as usize - 1].mul(&lin).expect("same dimension");
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Self::zero(self.n);
        for (a, c) in self.terms() {
            let mut term = Self::constant(self.n, c);
            for (i, &e) in a.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[i][e as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `|b|^p` for even `p`, as the polynomial `b^p`.
    pub fn abs_power_even(base: &Self, p: u32) -> Result<Self> {
        if p == 0 || !p.is_multiple_of(2) {
            return Err(Error::OddPower(p));
        }
        Ok(base.pow(p))
    }

    /// Parses the text format `coef * x1^a1*...*xn^an + ...` over `n` variables.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        super::parse::parse_polynomial(text, n)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, &c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (k, c < 0.0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{mag:?}")?;
            for (i, &e) in a.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.n, self)
    }
}

//! Multivariate polynomials, monomial bases and semialgebraic sets.

mod affine;
mod multi_index;
mod parse;
mod polynomial;
mod set;

pub use affine::DiagonalAffine;
pub use multi_index::{binomial, enumerate_indices, monomial_count, MonomialTable, MultiIndex};
pub use polynomial::Polynomial;
pub use set::{product_set, BallMode, ProductStructure, SemialgebraicSet};

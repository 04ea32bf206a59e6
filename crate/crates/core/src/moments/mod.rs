//! Truncated moment sequences, moment and localizing matrices, and
//! moments of concrete measures.

mod descriptor;
mod matrices;
mod sequence;

pub use descriptor::{descriptor_moments, gauss_legendre, MaskGrid, MeasureDescriptor, Univariate};
pub(crate) use matrices::min_eigenvalue;
pub use matrices::{localizing_matrix, moment_matrix, MomentMatrix};
pub use sequence::{embed_marginal_index, TruncatedMomentSequence};

//! Conic programs, an interior-point solver for them, and SDPA export.

mod presolve;
mod program;
mod sdpa;
mod solver;

pub use program::{BlockBuilder, Cone, ConeBlock, ConeKind, ConicProgram, LinearEquality, SymSparse};
pub use sdpa::{export_sdpa, to_sdpa_string};
pub use solver::{solve, IterationLog, Solution, SolveReport, SolveStatus, SolverOptions};

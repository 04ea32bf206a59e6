//! Optimal transport between measures described by their moments.
//!
//! Transport and Gromov-Wasserstein problems with polynomial costs on
//! compact semialgebraic sets are cast as generalized moment problems and
//! solved through the moment-SoS hierarchy of semidefinite relaxations.
//! The crate contains the polynomial and moment algebra, the relaxation
//! assembly, a semidefinite solver, and Christoffel-function tools for
//! reading support and density information back from moment sequences.

pub mod conic;
pub mod error;
pub mod formulations;
pub mod io;
pub mod moments;
pub mod polyalg;
pub mod postprocess;
pub mod relaxation;
pub mod shapes;

pub use error::{Error, Result};

//! Transport problems written as generalized moment problems.
//!
//! Builders take marginals and sets in original coordinates. Each domain
//! is mapped affinely into the unit ball, and the cost is composed with
//! the inverse map, so optimal values are unchanged; moment sequences of
//! the variables live in the normalized coordinates and
//! [`GeneralizedMomentProblem::readout`] maps them back.

mod fixed_point;
mod gromov;
mod problem;
mod wasserstein;

pub use fixed_point::{gw_fixed_point, relative_change, FixedPointOptions, FixedPointOutcome, TraceEntry};
pub use gromov::{build_gw_barycenter, build_gw_even, gw_linearize, GwCost};
pub use problem::{
    GeneralizedMomentProblem, LinearMomentFunctional, LinearTerm, MassBound, MeasureVariable, MomentConstraint,
    Objective, ProblemKind, QuadraticMomentFunctional, QuadraticTerm, Readout, SequenceTerm, VariableRole,
};
pub use wasserstein::{
    build_barycenter_wp, build_multimarginal, build_piecewise, build_wp_even, build_wp_odd, separable_power_cost,
    CostPiece,
};

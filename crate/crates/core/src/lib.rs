//! Numerical laboratory for the nearly-critical Lane–Emden system
//! −Δu = v^p, −Δv = u^q on a ball, with (p, q) approaching the critical
//! hyperbola 1/(p+1) + 1/(q+1) = (N−2)/N.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubble;
pub mod bvp;
pub mod error;
pub mod greens;
pub mod numerics;
pub mod reduced_energy;
pub mod report;

pub use error::{Error, Result};

/// Concrete scalar used by the domain modules.
pub type Real = f64;
pub type Grid = numerics::Grid1D<Real>;
pub type Trajectory = numerics::Trajectory<Real>;

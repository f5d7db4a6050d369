//! The standard bubble (U, V): the entire radial ground state with U(0) = 1,
//! its decay constants, scaled copies, linearized kernels and integral constants.

mod constants;
mod exponents;
mod io;
mod kernels;
mod profile;
mod radial;

pub use constants::{compute_constants, BubbleConstants};
pub use exponents::{make_exponents, ExponentPair, Regime, SERRIN_BAND};
pub use io::ProfileHeader;
pub use kernels::{eval_bubble, eval_kernels};
pub use profile::{
    fit_decay_constants, solve_ground_state, solve_ground_state_with, tail_exponents, DecayFit,
    GroundStateOptions, RadialProfile, TailLaw,
};
pub use radial::{quintic_hermite, Outcome, RadialSystem, ShotMode, R_START};

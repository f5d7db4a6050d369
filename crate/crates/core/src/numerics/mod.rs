//! Shared numerical kernels. Everything here is generic over [`Scalar`] so the
//! same code runs in `f32` or `f64`; the domain modules use `f64`.

mod extrapolate;
mod lambert;
mod linalg;
mod newton;
mod ode;
mod quadrature;
mod roots;
mod sphere;

pub use extrapolate::{
    fit_free_exponent, least_squares, richardson_extrapolate, Extrapolation, FreeExponentFit,
    LeastSquares,
};
pub use lambert::lambert_wm1;
pub use linalg::{determinant, solve_least_squares, solve_linear};
pub use newton::{newton_solve, newton_solve_with, NewtonOptions};
pub use ode::{integrate_ode, integrate_ode_with, OdeOptions, Termination, Trajectory};
pub use quadrature::{gauss_legendre, integrate_adaptive, GaussLegendre, Grid1D, QuadResult};
pub use roots::{bisect, bisect_classifier, Bracket, RootResult};
pub use sphere::{graded_theta, orthonormal_frame, sphere_area, uniform_theta, AngularRule};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar usable by every kernel in this module.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Odd extension |x|^{e-1} x used for nonlinearities that may see negative values.
#[inline]
pub fn signed_pow<T: Scalar>(x: T, e: T) -> T {
    if x >= T::zero() {
        x.powf(e)
    } else {
        -(-x).powf(e)
    }
}

/// Max-norm of a slice.
pub fn norm_inf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt()
}

/// `n` logarithmically spaced points from `a` to `b` inclusive.
pub fn logspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    assert!(n >= 2 && a > T::zero() && b > T::zero());
    let (la, lb) = (a.ln(), b.ln());
    let step = (lb - la) / T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                (la + step * T::from_usize(i).unwrap()).exp()
            }
        })
        .collect()
}

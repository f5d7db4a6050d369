use super::Scalar;
use crate::error::{Error, Result};

/// Lower real branch W₋₁ of the Lambert function: the solution y ≤ −1 of
/// y·e^y = x for x ∈ [−1/e, 0).
pub fn lambert_wm1<T: Scalar>(x: T) -> Result<T> {
    let branch = -(-T::one()).exp();
    if !(x >= branch && x < T::zero()) {
        return Err(Error::Domain(format!(
            "lambert_wm1 needs x in [-1/e, 0), got {}",
            x
        )));
    }
    if x == branch {
        return Ok(-T::one());
    }
    // seed: branch-point series near -1/e, asymptotic logs elsewhere
    let mut y = if x < T::lit(-0.25) {
        let p = -(T::lit(2.0) * (T::one() + T::E() * x)).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    for _ in 0..64 {
        let ey = y.exp();
        let f = y * ey - x;
        if f == T::zero() {
            break;
        }
        let wp1 = y + T::one();
        if wp1 == T::zero() {
            break;
        }
        // Halley step
        let denom = ey * wp1 - (y + T::lit(2.0)) * f / (T::lit(2.0) * wp1);
        let dy = f / denom;
        let y_new = (y - dy).min(-T::one());
        if (y_new - y).abs() <= T::epsilon() * y.abs() {
            y = y_new;
            break;
        }
        y = y_new;
    }
    Ok(y)
}

use super::Scalar;
use crate::error::{Error, Result};
use serde::Serialize;

/// Outcome of a root solve. `V` is the unknown (scalar or vector).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootResult<V, T = V> {
    pub value: V,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Bisection for a sign change of `f` on `[a, b]`; stops when
/// `|f| ≤ tol` or the bracket can no longer be halved.
pub fn bisect<T, F>(mut f: F, a: T, b: T, tol: T, max_iter: usize) -> Result<RootResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == T::zero() {
        return Ok(RootResult {
            value: lo,
            residual: T::zero(),
            iterations: 0,
            converged: true,
        });
    }
    if fhi == T::zero() {
        return Ok(RootResult {
            value: hi,
            residual: T::zero(),
            iterations: 0,
            converged: true,
        });
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::BracketNotFound {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let mut best = (lo, flo);
    for it in 1..=max_iter {
        let mid = lo + (hi - lo) * T::lit(0.5);
        let fm = f(mid);
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= tol {
            return Ok(RootResult {
                value: mid,
                residual: fm,
                iterations: it,
                converged: true,
            });
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(RootResult {
        value: best.0,
        residual: best.1,
        iterations: max_iter,
        converged: best.1.abs() <= tol,
    })
}

/// Bracket `[lo, hi]` with `classify(lo) = false`, `classify(hi) = true`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub iterations: usize,
}

/// Bisection on a monotone predicate (false below the threshold, true above)
/// until `hi - lo ≤ rel_tol·|hi|`. Used for shooting, where only the side of
/// the threshold is observable.
pub fn bisect_classifier<T, F>(
    mut classify: F,
    lo: T,
    hi: T,
    rel_tol: T,
    max_iter: usize,
) -> Result<Bracket<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<bool>,
{
    let (mut lo, mut hi) = (lo, hi);
    for it in 0..max_iter {
        if hi - lo <= rel_tol * hi.abs() {
            return Ok(Bracket {
                lo,
                hi,
                iterations: it,
            });
        }
        // geometric midpoint for positive brackets spanning decades
        let mid = if lo > T::zero() && hi / lo > T::lit(4.0) {
            (lo * hi).sqrt()
        } else {
            lo + (hi - lo) * T::lit(0.5)
        };
        if mid <= lo || mid >= hi {
            return Ok(Bracket {
                lo,
                hi,
                iterations: it,
            });
        }
        if classify(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence {
        stage: "bisection".into(),
        iterations: max_iter,
        residual: ((hi - lo) / hi.abs()).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!(r.converged && (r.value - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn classifier_threshold() {
        let b = bisect_classifier(|s: f64| Ok(s > 0.3), 1e-4, 1e4, 1e-14, 500).unwrap();
        assert!(b.lo <= 0.3 && b.hi >= 0.3 && b.hi - b.lo < 1e-14);
    }

    #[test]
    fn no_sign_change() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10, 50).is_err());
    }
}

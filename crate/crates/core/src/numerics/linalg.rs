//! Small dense linear algebra; the systems here have at most a few dozen
//! unknowns.

use super::Scalar;
use crate::error::{Error, Result};

/// Solves `a x = b` (row-major `n×n`) by Gaussian elimination with partial
/// pivoting. Fails on an (numerically) exactly singular pivot.
pub fn solve_linear<T: Scalar>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = a.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::SingularJacobian);
    }
    for col in 0..n {
        let (piv, pmax) = (col..n).fold((col, T::zero()), |(bi, bv), r| {
            let v = m[r * n + col].abs();
            if v > bv {
                (r, v)
            } else {
                (bi, bv)
            }
        });
        if pmax <= scale * T::epsilon() * T::lit(16.0) {
            return Err(Error::SingularJacobian);
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f != T::zero() {
                for c in col..n {
                    m[r * n + c] = m[r * n + c] - f * m[col * n + c];
                }
                x[r] = x[r] - f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in (col + 1)..n {
            s = s - m[col * n + c] * x[c];
        }
        x[col] = s / m[col * n + col];
    }
    Ok(x)
}

/// Least-squares solution of the overdetermined `rows×cols` system by
/// Householder QR. Returns the coefficients.
pub fn solve_least_squares<T: Scalar>(
    a: &[T],
    rows: usize,
    cols: usize,
    b: &[T],
) -> Result<Vec<T>> {
    assert_eq!(a.len(), rows * cols);
    assert!(rows >= cols);
    let mut m = a.to_vec();
    let mut y = b.to_vec();
    for k in 0..cols {
        let norm = (k..rows)
            .fold(T::zero(), |s, r| s + m[r * cols + k].powi(2))
            .sqrt();
        if norm <= T::min_positive_value() {
            return Err(Error::SingularJacobian);
        }
        let alpha = if m[k * cols + k] > T::zero() {
            -norm
        } else {
            norm
        };
        let mut v: Vec<T> = (k..rows).map(|r| m[r * cols + k]).collect();
        v[0] = v[0] - alpha;
        let vn = v.iter().fold(T::zero(), |s, x| s + *x * *x);
        if vn <= T::min_positive_value() {
            continue;
        }
        for c in k..cols {
            let d = (k..rows).fold(T::zero(), |s, r| s + v[r - k] * m[r * cols + c]);
            let f = T::lit(2.0) * d / vn;
            for r in k..rows {
                m[r * cols + c] = m[r * cols + c] - f * v[r - k];
            }
        }
        let d = (k..rows).fold(T::zero(), |s, r| s + v[r - k] * y[r]);
        let f = T::lit(2.0) * d / vn;
        for r in k..rows {
            y[r] = y[r] - f * v[r - k];
        }
    }
    let diag_scale = (0..cols).fold(T::zero(), |s, k| s.max(m[k * cols + k].abs()));
    let mut x = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let d = m[k * cols + k];
        if d.abs() <= diag_scale * T::epsilon() * T::lit(64.0) {
            return Err(Error::SingularJacobian);
        }
        let mut s = y[k];
        for c in (k + 1)..cols {
            s = s - m[k * cols + c] * x[c];
        }
        x[k] = s / d;
    }
    Ok(x)
}

/// Determinant of a row-major `n×n` matrix by partial-pivoting elimination.
pub fn determinant<T: Scalar>(a: &[T], n: usize) -> T {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n).fold(col, |bi, r| {
            if m[r * n + col].abs() > m[bi * n + col].abs() {
                r
            } else {
                bi
            }
        });
        if m[piv * n + col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det = det * d;
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            for c in col..n {
                m[r * n + c] = m[r * n + c] - f * m[col * n + c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [2.0, 1.0, 1.0, 1.0, 3.0, 2.0, 1.0, 0.0, 0.0];
        let x = solve_linear(&a, &[4.0, 5.0, 6.0]).unwrap();
        let r: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum())
            .collect();
        for (ri, bi) in r.iter().zip([4.0, 5.0, 6.0]) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        assert!((determinant(&a, 3) + 5.0_f64).abs() < 1e-14);
        assert_eq!(determinant(&[1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn singular_detected() {
        assert!(solve_linear(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn least_squares_line() {
        // y = 1 + 2x exactly
        let xs = [0.0, 1.0, 2.0, 3.0];
        let a: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let b: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let c = solve_least_squares(&a, 4, 2, &b).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-13 && (c[1] - 2.0).abs() < 1e-13);
    }
}

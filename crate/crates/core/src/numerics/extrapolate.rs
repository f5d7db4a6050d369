use super::linalg::solve_least_squares;
use super::Scalar;
use crate::error::{Error, Result};
use serde::Serialize;

/// Fit of value(h) = L + c·h^order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation<T> {
    pub limit: T,
    pub coefficient: T,
    /// RMS misfit of the model over the samples (zero for two samples).
    pub residual: T,
}

/// Richardson extrapolation to h → 0 under value(h) = L + c·h^order. Two
/// samples use the elimination formula; more samples are fitted by least
/// squares.
pub fn richardson_extrapolate<T: Scalar>(samples: &[(T, T)], order: T) -> Result<Extrapolation<T>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    if samples.iter().any(|(h, _)| !(*h > T::zero())) {
        return Err(Error::Invalid(
            "Richardson needs positive step sizes".into(),
        ));
    }
    if samples.len() == 2 {
        let (h1, v1) = samples[0];
        let (h2, v2) = samples[1];
        let (a, b) = (h1.powf(order), h2.powf(order));
        if a == b {
            return Err(Error::Invalid(
                "Richardson needs distinct step sizes".into(),
            ));
        }
        let limit = (a * v2 - b * v1) / (a - b);
        let coefficient = (v1 - v2) / (a - b);
        return Ok(Extrapolation {
            limit,
            coefficient,
            residual: T::zero(),
        });
    }
    let xs: Vec<T> = samples.iter().map(|(h, _)| h.powf(order)).collect();
    let ys: Vec<T> = samples.iter().map(|(_, v)| *v).collect();
    let fit = least_squares(&[&vec![T::one(); xs.len()], &xs], &ys)?;
    Ok(Extrapolation {
        limit: fit.coefficients[0],
        coefficient: fit.coefficients[1],
        residual: fit.residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeastSquares<T> {
    pub coefficients: Vec<T>,
    /// RMS residual.
    pub residual: T,
}

/// Linear least squares y ≈ Σ_j c_j basis_j, each basis given by its sampled
/// column.
pub fn least_squares<T: Scalar>(basis: &[&[T]], y: &[T]) -> Result<LeastSquares<T>> {
    let rows = y.len();
    let cols = basis.len();
    if rows < cols {
        return Err(Error::InsufficientData {
            needed: cols,
            got: rows,
        });
    }
    let mut a = vec![T::zero(); rows * cols];
    for (j, col) in basis.iter().enumerate() {
        assert_eq!(col.len(), rows);
        for i in 0..rows {
            a[i * cols + j] = col[i];
        }
    }
    let coefficients = solve_least_squares(&a, rows, cols, y)?;
    let ss = (0..rows).fold(T::zero(), |s, i| {
        let m = (0..cols).fold(T::zero(), |acc, j| acc + a[i * cols + j] * coefficients[j]);
        s + (y[i] - m).powi(2)
    });
    Ok(LeastSquares {
        coefficients,
        residual: (ss / T::from_usize(rows).unwrap()).sqrt(),
    })
}

/// Fit of P(x) = L + c·x^σ with σ free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeExponentFit<T> {
    pub limit: T,
    pub coefficient: T,
    pub sigma: T,
    pub residual: T,
}

/// Fits L + c·x^σ: a scan over σ ∈ [sigma_lo, sigma_hi] refined by golden
/// section, with (L, c) by linear least squares at each σ.
pub fn fit_free_exponent<T: Scalar>(
    samples: &[(T, T)],
    sigma_lo: T,
    sigma_hi: T,
) -> Result<FreeExponentFit<T>> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: samples.len(),
        });
    }
    let eval = |sigma: T| -> Option<(T, T, T)> {
        let e = richardson_extrapolate(samples, sigma).ok()?;
        if samples.len() == 3 {
            // three points, three unknowns: measure the misfit of the third
            let ys = samples
                .iter()
                .map(|(x, v)| *v - e.limit - e.coefficient * x.powf(sigma));
            let r = ys.fold(T::zero(), |s, d| s + d * d).sqrt();
            return Some((r, e.limit, e.coefficient));
        }
        Some((e.residual, e.limit, e.coefficient))
    };
    let n = 200;
    let mut best: Option<(T, T)> = None;
    for i in 0..=n {
        let s = sigma_lo
            + (sigma_hi - sigma_lo) * T::from_usize(i).unwrap() / T::from_usize(n).unwrap();
        if let Some((r, _, _)) = eval(s) {
            if best.is_none_or(|(_, br)| r < br) {
                best = Some((s, r));
            }
        }
    }
    let (s0, _) = best.ok_or(Error::InsufficientData {
        needed: 3,
        got: samples.len(),
    })?;
    let h = (sigma_hi - sigma_lo) / T::from_usize(n).unwrap();
    let (mut a, mut b) = ((s0 - h).max(sigma_lo), (s0 + h).min(sigma_hi));
    let g = T::lit(0.618_033_988_749_894_8);
    let f = |s: T| eval(s).map_or(T::infinity(), |v| v.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let sigma = (a + b) * T::lit(0.5);
    let (residual, limit, coefficient) =
        eval(sigma).ok_or(Error::NonFinite("exponent fit".into()))?;
    Ok(FreeExponentFit {
        limit,
        coefficient,
        sigma,
        residual,
    })
}

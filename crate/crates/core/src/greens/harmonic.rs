//! Harmonic extensions of boundary data by the Poisson integral.

use super::{dist, dot, GreensBundle};
use crate::bubble::Regime;
use crate::error::{Error, Result};
use crate::numerics::{graded_theta, orthonormal_frame, sphere_area, AngularRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicValue {
    pub value: f64,
    /// Difference between two angular resolutions.
    pub error: f64,
}

fn poisson_level(
    n: usize,
    x: &[f64],
    data: &dyn Fn(&[f64]) -> f64,
    frame: &[Vec<f64>],
    rank: usize,
    panels: usize,
    order: usize,
) -> f64 {
    let r = dot(x, x).sqrt();
    let area: f64 = sphere_area(n);
    let theta_min = 0.02 * (1.0 - r).max(1e-12);
    let edges: Vec<f64> = graded_theta(theta_min, panels);
    let rule = match rank {
        0 | 1 => AngularRule::axisymmetric(n, frame, &edges, order),
        2 if n >= 3 => AngularRule::planar(n, frame, &edges, order, order + 4),
        _ => AngularRule::monte_carlo(n, 20000, 7),
    };
    if r < 1e-14 {
        return rule
            .directions
            .iter()
            .zip(&rule.weights)
            .map(|(z, w)| w * data(z))
            .sum::<f64>()
            / area;
    }
    // subtract the data at the nearest boundary point; ∫P = 1
    let xhat: Vec<f64> = x.iter().map(|v| v / r).collect();
    let g0 = data(&xhat);
    let scale = (1.0 - r * r) / area;
    let mut sum = 0.0;
    for (z, w) in rule.directions.iter().zip(&rule.weights) {
        let d = dist(x, z);
        sum += w * scale * (data(z) - g0) / d.powi(n as i32);
    }
    g0 + sum
}

/// Value at x of the harmonic function in the unit ball with boundary data
/// `data`, where the data depend on z only through z·d for d in `dirs`.
pub fn poisson_extension(
    n: usize,
    x: &[f64],
    data: &dyn Fn(&[f64]) -> f64,
    dirs: &[&[f64]],
) -> Result<HarmonicValue> {
    if x.len() != n || dot(x, x) >= 1.0 {
        return Err(Error::Invalid(format!(
            "point {x:?} is not inside the unit ball"
        )));
    }
    let mut span: Vec<&[f64]> = vec![x];
    span.extend_from_slice(dirs);
    let (frame, rank) = orthonormal_frame::<f64>(n, &span);
    let value = poisson_level(n, x, data, &frame, rank, 24, 12);
    let rough = poisson_level(n, x, data, &frame, rank, 16, 10);
    if !value.is_finite() {
        return Err(Error::NonFinite("Poisson integral".into()));
    }
    Ok(HarmonicValue {
        value,
        error: (value - rough).abs(),
    })
}

/// Harmonic extension of the boundary trace of the leading singular term:
/// γ_N |z−ξ|^{2−(N−2)p} below the Serrin exponent, γ_N log|z−ξ| |z−ξ|^{2−N}
/// at it.
pub fn hat_h(bundle: &GreensBundle, x: &[f64], xi: &[f64]) -> Result<HarmonicValue> {
    let n = bundle.exp.nf();
    let g = bundle.gamma_n;
    if !bundle.domain.contains(xi) {
        return Err(Error::Invalid(format!(
            "point {xi:?} is not inside the unit ball"
        )));
    }
    match bundle.regime() {
        Regime::Sub => {
            let e = 2.0 - (n - 2.0) * bundle.exp.p;
            poisson_extension(bundle.n(), x, &|z| g * dist(z, xi).powf(e), &[xi])
        }
        Regime::Serrin => poisson_extension(
            bundle.n(),
            x,
            &|z| {
                let d = dist(z, xi);
                g * d.ln() * d.powf(2.0 - n)
            },
            &[xi],
        ),
        Regime::Super => Err(Error::WrongRegime(format!(
            "the harmonic extension ĥ needs p ≤ N/(N−2), got p = {}",
            bundle.exp.p
        ))),
    }
}

/// Harmonic extension of |z−ξ|^{N−(N−2)p}.
pub fn bar_h(bundle: &GreensBundle, x: &[f64], xi: &[f64]) -> Result<HarmonicValue> {
    bundle.require_sub("the harmonic extension h̄")?;
    if !bundle.domain.contains(xi) {
        return Err(Error::Invalid(format!(
            "point {xi:?} is not inside the unit ball"
        )));
    }
    let e = bundle.exp.nf() - (bundle.exp.nf() - 2.0) * bundle.exp.p;
    poisson_extension(bundle.n(), x, &|z| dist(z, xi).powf(e), &[xi])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_affine_data() {
        // on the sphere |z−ξ|² = 1 + |ξ|² − 2z·ξ, whose extension is affine
        let n = 4;
        let x = [0.3, -0.2, 0.5, 0.1];
        let xi = [0.2, 0.1, 0.0, 0.0];
        let r = poisson_extension(n, &x, &|z| dist(z, &xi).powi(2), &[&xi]).unwrap();
        assert_relative_eq!(
            r.value,
            1.0 + dot(&xi, &xi) - 2.0 * dot(&x, &xi),
            max_relative = 1e-12
        );
    }
}

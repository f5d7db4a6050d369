//! Quadrature over the unit ball for integrands with integrable point
//! singularities.
//!
//! A partition of unity w_j ∝ |y − s_j|^{−2N} splits the integrand into
//! pieces singular at a single point; each piece is integrated in polar
//! coordinates about its point, with radial panels graded geometrically
//! toward the point and toward the boundary. The angular rule follows the
//! dimension of the span the integrand depends on.

use super::{dist, dot};
use crate::error::{Error, Result};
use crate::numerics::{
    gauss_legendre, orthonormal_frame, uniform_theta, AngularRule, GaussLegendre,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeOptions {
    /// The integrand behaves like |y − s|^{e−N} near a singular point s.
    pub singular_exponent: f64,
    pub radial_order: usize,
    pub theta_panels: usize,
    pub theta_order: usize,
    pub phi_order: usize,
    pub mc_count: usize,
    pub seed: u64,
    /// Relative error above which the result is rejected.
    pub rel_tol: f64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self {
            singular_exponent: 1.0,
            radial_order: 8,
            theta_panels: 16,
            theta_order: 8,
            phi_order: 10,
            mc_count: 4000,
            seed: 0x5eed,
            rel_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub value: f64,
    /// Estimate from two resolutions, or the sampling error for the
    /// Monte Carlo angular rule.
    pub error: f64,
}

/// Panel edges on [0, 1] in u = ρ/ρ_max; the first panel is never
/// evaluated directly.
fn radial_edges(e: f64) -> Vec<f64> {
    // grade toward 0 until the neglected mass u^e is negligible, but not
    // below the resolution of the coordinates y = s + ρω
    let levels = ((40.0 / e.max(0.05)).ceil() as usize).clamp(12, 46);
    let mut edges: Vec<f64> = (1..=levels).rev().map(|k| 0.5f64.powi(k as i32)).collect();
    edges.insert(0, 0.0);
    for k in 2..=24 {
        edges.push(1.0 - 0.5f64.powi(k));
    }
    edges.push(1.0);
    edges
}

struct Level {
    rule: GaussLegendre<f64>,
    edges: Vec<f64>,
    theta_panels: usize,
    theta_order: usize,
    phi_order: usize,
}

fn integrate_level(
    n: usize,
    points: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    lev: &Level,
    opts: &VolumeOptions,
) -> (f64, f64) {
    let mut total = 0.0;
    let mut var = 0.0;
    let mut y = vec![0.0; n];
    let twice_n = 2 * n as i32;
    for (j, s) in points.iter().enumerate() {
        let rel: Vec<Vec<f64>> = points
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j)
            .map(|(_, q)| q.iter().zip(s).map(|(a, b)| a - b).collect())
            .collect();
        let mut span: Vec<&[f64]> = vec![s.as_slice()];
        span.extend(rel.iter().map(|v| v.as_slice()));
        let (frame, rank) = orthonormal_frame::<f64>(n, &span);
        let rule = match rank {
            0 | 1 => AngularRule::axisymmetric(
                n,
                &frame,
                &uniform_theta(lev.theta_panels),
                lev.theta_order,
            ),
            2 if n >= 3 => AngularRule::planar(
                n,
                &frame,
                &uniform_theta(lev.theta_panels),
                lev.theta_order,
                lev.phi_order,
            ),
            _ => AngularRule::monte_carlo(n, opts.mc_count, opts.seed.wrapping_add(j as u64)),
        };
        let ss = dot(s, s);
        let mut ray_values = Vec::with_capacity(rule.len());
        for (omega, &wt) in rule.directions.iter().zip(&rule.weights) {
            let cw = dot(s, omega);
            let rho_max = -cw + (cw * cw + 1.0 - ss).max(0.0).sqrt();
            let mut panels = Vec::with_capacity(lev.edges.len());
            for w in lev.edges.windows(2).skip(1) {
                let mut panel = 0.0;
                for (u, gw) in lev.rule.mapped(w[0], w[1]) {
                    let rho = u * rho_max;
                    for i in 0..n {
                        y[i] = s[i] + rho * omega[i];
                    }
                    let mut pu = 1.0;
                    if points.len() > 1 {
                        let dj = rho;
                        let mut sum = 1.0;
                        for (l, q) in points.iter().enumerate() {
                            if l != j {
                                let dl = dist(&y, q);
                                if dl == 0.0 {
                                    sum = f64::INFINITY;
                                    break;
                                }
                                sum += (dj / dl).powi(twice_n);
                            }
                        }
                        pu = 1.0 / sum;
                    }
                    if pu > 0.0 {
                        panel += gw * pu * f(&y) * rho.powi(n as i32 - 1);
                    }
                }
                panels.push(panel);
            }
            // the innermost panel [0, u_1] by the geometric tail of the two
            // panels above it (exact for a pure power law)
            let q = panels[0] / panels[1];
            let tail = if q.is_finite() && q > 0.0 && q < 1.0 {
                panels[0] * q / (1.0 - q)
            } else {
                0.0
            };
            let ray = rho_max * (tail + panels.iter().sum::<f64>());
            ray_values.push(ray);
            total += wt * ray;
        }
        if rule.sampled {
            let m = ray_values.len() as f64;
            let mean = ray_values.iter().sum::<f64>() / m;
            let sd2 = ray_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let area: f64 = rule.weights.iter().sum();
            var += area * area * sd2 / m;
        }
    }
    (total, var.sqrt())
}

/// ∫_B f(y) dy for f with integrable singularities at `singular` points.
/// Points closer than 1e−14 are merged. Fails with
/// `QuadratureNotConverged` when the error estimate exceeds `rel_tol`.
pub fn volume_integral(
    n: usize,
    singular: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    opts: &VolumeOptions,
) -> Result<VolumeResult> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for s in singular {
        if s.len() != n || dot(s, s) >= 1.0 {
            return Err(Error::Invalid(format!(
                "singular point {s:?} is not inside the unit ball"
            )));
        }
        if points.iter().all(|q| dist(q, s) > 1e-14) {
            points.push(s.clone());
        }
    }
    if points.is_empty() {
        points.push(vec![0.0; n]);
    }
    let edges = radial_edges(opts.singular_exponent);
    let fine = Level {
        rule: gauss_legendre(opts.radial_order),
        edges: edges.clone(),
        theta_panels: opts.theta_panels,
        theta_order: opts.theta_order,
        phi_order: opts.phi_order,
    };
    let coarse = Level {
        rule: gauss_legendre(opts.radial_order.saturating_sub(2).max(3)),
        edges,
        theta_panels: (opts.theta_panels / 2).max(2),
        theta_order: opts.theta_order,
        phi_order: (opts.phi_order * 2 / 3).max(3),
    };
    let (value, sampling) = integrate_level(n, &points, f, &fine, opts);
    let (rough, _) = integrate_level(n, &points, f, &coarse, opts);
    let error = sampling.max((value - rough).abs());
    if !value.is_finite() {
        return Err(Error::NonFinite("volume integral".into()));
    }
    if error > opts.rel_tol * value.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::QuadratureNotConverged { estimate: error });
    }
    Ok(VolumeResult { value, error })
}

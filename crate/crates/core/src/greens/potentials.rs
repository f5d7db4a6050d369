//! The G^p-potentials w̃ (−Δw̃ = G(·,ξ)^p, w̃ = 0 on ∂B) and their regular
//! parts, for a single pole at the center and for configurations.

use super::harmonic::{bar_h, hat_h};
use super::volume::{volume_integral, VolumeOptions};
use super::{dist, Configuration, GreensBundle};
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, richardson_extrapolate};
use serde::{Deserialize, Serialize};

const QUAD_TOL: f64 = 1e-15;

/// Offsets |x−ξ| at which the centered regular part is sampled before
/// extrapolating to the pole.
pub const CENTER_OFFSETS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// ((1−u)^p − 1)/u with u = t^{N−2}; tends to −p as t → 0.
fn k_ratio(t: f64, n: f64, p: f64) -> f64 {
    let u = t.powf(n - 2.0);
    if u >= 1.0 {
        return -1.0 / u;
    }
    if u == 0.0 {
        return -p;
    }
    (p * (-u).ln_1p()).exp_m1() / u
}

/// Building blocks of the centered potential. With e = N−(N−2)p and
/// g(t) = (1−t^{N−2})^p, ∫ t^{e−1} φ(t) dt = (1/e) ∫ φ(v^{1/e}) dv removes
/// the endpoint singularity.
struct Center {
    n: f64,
    p: f64,
    e: f64,
    beta1: f64,
    gp: f64,
}

impl Center {
    fn new(bundle: &GreensBundle) -> Result<Self> {
        bundle.require_sub("the centered potential w̃")?;
        let n = bundle.exp.nf();
        let p = bundle.exp.p;
        Ok(Self {
            n,
            p,
            e: n - (n - 2.0) * p,
            beta1: 2.0 - (n - 2.0) * p,
            gp: bundle.gamma_n.powf(p),
        })
    }

    /// ∫_0^r t^{e−1}(g−1) dt.
    fn inner(&self, r: f64) -> Result<f64> {
        let (n, p, e) = (self.n, self.p, self.e);
        let f = |v: f64| {
            let t = v.powf(1.0 / e);
            t.powf(n - 2.0) * k_ratio(t, n, p)
        };
        Ok(integrate_adaptive(f, 0.0, r.powf(e), QUAD_TOL)?.value / e)
    }

    /// ∫_r^1 t^{1−(N−2)p}(g−1) dt.
    fn outer(&self, r: f64) -> Result<f64> {
        let (n, p, e) = (self.n, self.p, self.e);
        let f = |v: f64| k_ratio(v.powf(1.0 / e), n, p);
        Ok(integrate_adaptive(f, r.powf(e), 1.0, QUAD_TOL)?.value / e)
    }

    /// ∫_0^1 t^{N−1} G^p dt.
    fn total(&self) -> Result<f64> {
        Ok(self.gp * (1.0 / self.e + self.inner(1.0)?))
    }
}

/// w̃(r) for the pole at the center: the radial solution of −Δw = G(·,0)^p
/// vanishing at r = 1, from
/// w(r) = (1/(N−2)) ∫_0^1 t^{N−1} G(t)^p (max(r,t)^{2−N} − 1) dt.
pub fn wtg_center(bundle: &GreensBundle, r: f64) -> Result<f64> {
    let c = Center::new(bundle)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Invalid(format!("radius {r} must lie in (0, 1]")));
    }
    let a = c.gp * (r.powf(c.e) / c.e + c.inner(r)?);
    let b = c.gp * ((1.0 - r.powf(c.beta1)) / c.beta1 + c.outer(r)?);
    Ok((r.powf(2.0 - c.n) * a + b - c.total()?) / (c.n - 2.0))
}

/// Singular expansion subtracted from w̃ to define its regular part, for
/// a pole of weight dd = δ^{N/(q₀+1)} with coefficient `a` on the second
/// term.
fn singular_part(bundle: &GreensBundle, dd: f64, a: f64, r: f64) -> f64 {
    let n = bundle.exp.nf();
    let p = bundle.exp.p;
    let g1 = bundle.gamma_tilde_1.unwrap_or(0.0);
    let mut s = g1 * dd.powf(p) * r.powf(2.0 - (n - 2.0) * p);
    if let Some(g2) = bundle.gamma_tilde_2 {
        s -= g2 * a * dd.powf(p - 1.0) * r.powf(n - (n - 2.0) * p);
    }
    s
}

/// θ̃(0) from the closed radial representation (no extrapolation).
pub fn wth_theta_center_series(bundle: &GreensBundle) -> Result<f64> {
    let c = Center::new(bundle)?;
    Ok((c.total()? - c.gp / c.beta1 - c.gp * c.outer(0.0)?) / (c.n - 2.0))
}

/// The regular part θ̃(ξ) = lim_{x→ξ} [singular expansion − w̃(x, ξ)].
/// At the center the limit is extrapolated from [`CENTER_OFFSETS`] in
/// the known next-order power; elsewhere it comes from the regularized
/// volume representation used by [`config_potentials`].
pub fn wth_theta(bundle: &GreensBundle, xi: &[f64]) -> Result<f64> {
    bundle.require_sub("θ̃")?;
    if !bundle.domain.contains(xi) {
        return Err(Error::Invalid(format!(
            "point {xi:?} is not inside the unit ball"
        )));
    }
    if xi.iter().all(|&v| v == 0.0) {
        let n = bundle.exp.nf();
        let e = n - (n - 2.0) * bundle.exp.p;
        let tau = bundle.gamma_n;
        let samples = CENTER_OFFSETS
            .iter()
            .map(|&r| {
                Ok((
                    r,
                    singular_part(bundle, 1.0, tau, r) - wtg_center(bundle, r)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        // with the second term subtracted the next power is e + N − 2
        let order = if bundle.second_term() { e + n - 2.0 } else { e };
        return Ok(richardson_extrapolate(&samples, order)?.limit);
    }
    let config = Configuration::single(1.0, xi.to_vec());
    wth_value(bundle, &config, xi, 0, &VolumeOptions::default()).map(|(v, _)| v)
}

/// Potentials of a configuration at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigPotentials {
    /// G̃_{δ,ξ}(x); `None` when x is one of the poles, where it is infinite.
    pub wtg: Option<f64>,
    /// The regular part with respect to pole i, H̃_{δ,ξ,i}(x).
    pub wth: f64,
    /// A_{δ,ξ,i} = δ_i^{N/(q₀+1)} τ(ξ_i) − Σ_{j≠i} δ_j^{N/(q₀+1)} G(ξ_i, ξ_j).
    pub a_i: f64,
    /// Quadrature error estimate for `wth`.
    pub error: f64,
}

fn pole_weights(bundle: &GreensBundle, config: &Configuration) -> Vec<f64> {
    let a = bundle.exp.alpha0();
    config.deltas.iter().map(|d| d.powf(a)).collect()
}

/// A_{δ,ξ,i}.
pub fn a_coefficient(bundle: &GreensBundle, config: &Configuration, i: usize) -> Result<f64> {
    config.validate(bundle)?;
    let dd = pole_weights(bundle, config);
    let xi = &config.points[i];
    let mut a = dd[i] * bundle.robin(xi)?;
    for (j, q) in config.points.iter().enumerate() {
        if j != i {
            a -= dd[j] * bundle.green(xi, q)?;
        }
    }
    Ok(a)
}

fn volume_options(bundle: &GreensBundle, base: &VolumeOptions) -> VolumeOptions {
    let n = bundle.exp.nf();
    VolumeOptions {
        singular_exponent: (n - (n - 2.0) * bundle.exp.p).min(base.singular_exponent),
        ..*base
    }
}

/// H̃_{δ,ξ,i}(x) = h_i(x) + ∫ G(x,y) R_i(y) dy, where h_i is the harmonic
/// extension of the singular expansion S_i and R_i = −ΔS_i − F^p with
/// F = Σ_j δ_j^{N/(q₀+1)} G(·, ξ_j). R_i is only weakly singular at ξ_i, so
/// the representation is valid at x = ξ_i. Returns (value, error).
pub fn wth_value(
    bundle: &GreensBundle,
    config: &Configuration,
    x: &[f64],
    i: usize,
    opts: &VolumeOptions,
) -> Result<(f64, f64)> {
    bundle.require_sub("the regular part H̃")?;
    config.validate(bundle)?;
    if !bundle.domain.contains(x) {
        return Err(Error::Invalid(format!(
            "point {x:?} is not inside the unit ball"
        )));
    }
    let n = bundle.exp.nf();
    let p = bundle.exp.p;
    let g = bundle.gamma_n;
    let dd = pole_weights(bundle, config);
    let a_i = a_coefficient(bundle, config, i)?;
    let xi = &config.points[i];
    let g1 = bundle.gamma_tilde_1()?;
    let mut h = g1 * dd[i].powf(p) / g * hat_h(bundle, x, xi)?.value;
    if let Some(g2) = bundle.gamma_tilde_2 {
        h -= g2 * a_i * dd[i].powf(p - 1.0) * bar_h(bundle, x, xi)?.value;
    }
    let second = bundle.second_term();
    let lead = dd[i] * g;
    let remainder = |y: &[f64]| -> f64 {
        let rho = dist(y, xi);
        if rho == 0.0 {
            return 0.0;
        }
        let mut ai_y = dd[i] * bundle.regular_part(y, xi);
        for (j, q) in config.points.iter().enumerate() {
            if j != i {
                let d = dist(y, q);
                if d == 0.0 {
                    return 0.0;
                }
                ai_y -= dd[j] * bundle.green_unchecked(y, q, d);
            }
        }
        let rn = rho.powf(n - 2.0);
        let eps = ai_y * rn / lead;
        // 1 − (1−ε)^p, with F = lead ρ^{2−N} (1 − ε) clamped at 0
        let mut t = if eps >= 1.0 {
            1.0
        } else {
            -(p * (-eps).ln_1p()).exp_m1()
        };
        if second {
            t -= p * a_i * rn / lead;
        }
        lead.powf(p) * rho.powf(-(n - 2.0) * p) * t
    };
    let mut poles: Vec<Vec<f64>> = config.points.clone();
    poles.push(x.to_vec());
    let f = |y: &[f64]| {
        let d = dist(x, y);
        if d == 0.0 {
            0.0
        } else {
            bundle.green_unchecked(x, y, d) * remainder(y)
        }
    };
    let vol = volume_integral(bundle.n(), &poles, &f, &volume_options(bundle, opts))?;
    Ok((h + vol.value, vol.error))
}

/// G̃_{δ,ξ}(x) = ∫ G(x,y) F(y)^p dy, or `None` when x is a pole.
pub fn wtg_value(
    bundle: &GreensBundle,
    config: &Configuration,
    x: &[f64],
    opts: &VolumeOptions,
) -> Result<Option<f64>> {
    config.validate(bundle)?;
    if !bundle.domain.contains(x) {
        return Err(Error::Invalid(format!(
            "point {x:?} is not inside the unit ball"
        )));
    }
    if config.points.iter().any(|q| dist(q, x) == 0.0) {
        return Ok(None);
    }
    let p = bundle.exp.p;
    let dd = pole_weights(bundle, config);
    let f = |y: &[f64]| {
        let mut fy = 0.0;
        for (j, q) in config.points.iter().enumerate() {
            let d = dist(y, q);
            if d == 0.0 {
                return 0.0;
            }
            fy += dd[j] * bundle.green_unchecked(y, q, d);
        }
        let d = dist(x, y);
        if d == 0.0 {
            return 0.0;
        }
        bundle.green_unchecked(x, y, d) * fy.max(0.0).powf(p)
    };
    let mut poles = config.points.clone();
    poles.push(x.to_vec());
    let vol = volume_integral(bundle.n(), &poles, &f, &volume_options(bundle, opts))?;
    Ok(Some(vol.value))
}

/// (G̃_{δ,ξ}(x), H̃_{δ,ξ,i}(x), A_{δ,ξ,i}) for pole i.
pub fn config_potentials(
    bundle: &GreensBundle,
    config: &Configuration,
    x: &[f64],
    i: usize,
    opts: &VolumeOptions,
) -> Result<ConfigPotentials> {
    if i >= config.k() {
        return Err(Error::Invalid(format!(
            "pole index {i} out of range for k = {}",
            config.k()
        )));
    }
    let (wth, error) = wth_value(bundle, config, x, i, opts)?;
    Ok(ConfigPotentials {
        wtg: wtg_value(bundle, config, x, opts)?,
        wth,
        a_i: a_coefficient(bundle, config, i)?,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::make_exponents;
    use approx::assert_relative_eq;

    #[test]
    fn ratio_limits() {
        assert_relative_eq!(k_ratio(1e-9, 4.0, 1.5), -1.5, max_relative = 1e-8);
        let t: f64 = 0.7;
        let u = t * t;
        assert_relative_eq!(
            k_ratio(t, 4.0, 1.5),
            ((1.0 - u).powf(1.5) - 1.0) / u,
            max_relative = 1e-14
        );
    }

    #[test]
    fn center_potential_solves_the_radial_problem() {
        // −(r^{N−1} w')' = r^{N−1} G^p, checked by fourth-order differences
        let bundle = GreensBundle::unit_ball(make_exponents(4, 1.5, 0.0).unwrap()).unwrap();
        let g = bundle.gamma_n;
        let n = 4.0;
        let p = 1.5;
        assert!(wtg_center(&bundle, 1.0).unwrap().abs() < 1e-13);
        for r in [0.1, 0.4, 0.8] {
            let h = 1e-2 * r;
            let w = |s: f64| wtg_center(&bundle, s).unwrap();
            let (f2, f1, f0, m1, m2) = (w(r + 2.0 * h), w(r + h), w(r), w(r - h), w(r - 2.0 * h));
            let d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
            let d1 = (-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * h);
            let lap = d2 + (n - 1.0) / r * d1;
            let gp = (g * (r.powf(2.0 - n) - 1.0)).powf(p);
            assert_relative_eq!(-lap, gp, max_relative = 1e-5);
        }
    }
}

//! Integral constants of the bubble.

use super::exponents::Regime;
use super::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::numerics::{integrate_adaptive, sphere_area};
use serde::{Deserialize, Serialize};

/// Integral constants of the bubble; every integral is over R^N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleConstants {
    pub n: usize,
    pub p: f64,
    pub q0: f64,
    pub regime: Regime,
    pub a: f64,
    pub b: f64,
    /// ∫ U^{q₀}, also ‖U‖_{L^{q₀}}^{q₀}.
    pub a1: f64,
    /// ∫ V^p; finite only above the Serrin exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    /// ∫ U^{q₀} log U Ψ⁰.
    pub a3: f64,
    /// ‖U‖_{L^{q₀+1}}^{(pq₀−1)/p}.
    pub s: f64,
    /// ∫|ΔU|^{(p+1)/p} / ‖U‖_{L^{q₀+1}}^{(p+1)/p}; equals `s` for the bubble.
    pub s_alt: f64,
    /// (N−2)p − N, the super-regime correction exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<f64>,
    /// Sub-regime remainder exponent; only bounds remainders and is not computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    /// ∫ U^{q₀+1}.
    pub j_u: f64,
    /// ∫ V^{p+1}.
    pub j_v: f64,
    /// N/(q₀+1)² ∫ U^{q₀+1}, the closed form of `a3`.
    pub a3_closed: f64,
    /// ∫ U^{q₀} Ψ⁰, which vanishes.
    pub psi0_moment: f64,
    /// −q₀ ∫ U^{q₀−1} Ψ¹ x₁, which equals `a1`.
    pub a1_alt: f64,
    /// Sum of the Pohozaev boundary terms at the last grid node, relative to ∫ U^{q₀+1}.
    pub pohozaev_boundary: f64,
}

/// ∫_0^∞ f(r, state) r^{N−1} dr: Gauss–Legendre over the profile grid, then
/// an adaptive integral in t = log r over the fitted tail law, then the
/// exponential remainder. `rate` is the decay rate in t of f·r^N.
pub(crate) fn radial_integral<F>(profile: &RadialProfile, f: F, rate: f64) -> Result<f64>
where
    F: Fn(f64, [f64; 4]) -> f64,
{
    let n = profile.exp.nf();
    let nodes = profile.grid.nodes();
    let weights = profile.grid.weights();
    let mut core = 0.0;
    for i in 0..nodes.len() {
        let y = [profile.u[i], profile.du[i], profile.v[i], profile.dv[i]];
        core += weights[i] * f(nodes[i], y) * nodes[i].powf(n - 1.0);
    }
    if !(rate > 0.0) {
        return Err(Error::DivergentIntegral(format!(
            "tail decay rate {rate} is not positive"
        )));
    }
    let t0 = profile.grid.span().1.ln();
    let t1 = t0 + 40.0 / rate;
    let g = |t: f64| {
        let r = t.exp();
        let (u, du) = profile.tail.u(r);
        let (v, dv) = profile.tail.v(r);
        f(r, [u, du, v, dv]) * (n * t).exp()
    };
    let tail = integrate_adaptive(g, t0, t1, 1e-13)?;
    let value = core + tail.value + g(t1) / rate;
    if !value.is_finite() {
        return Err(Error::NonFinite("radial integral".into()));
    }
    Ok(value)
}

/// Decay power of U: U ≈ r^{−power} (up to logarithms).
fn u_power(profile: &RadialProfile) -> f64 {
    match profile.regime {
        Regime::Super | Regime::Serrin => profile.exp.nf() - 2.0,
        Regime::Sub => profile.exp.m(),
    }
}

/// Computes A₁, A₂, A₃, S and the identities that cross-check them.
pub fn compute_constants(profile: &RadialProfile) -> Result<BubbleConstants> {
    let exp = &profile.exp;
    let n = exp.nf();
    let (p, q0) = (exp.p, exp.q0);
    let area: f64 = sphere_area(exp.n);
    let lu = u_power(profile);
    // logarithmic factors in the Serrin regime slow the decay slightly
    let slack = if profile.regime == Regime::Serrin {
        0.9
    } else {
        1.0
    };

    let a1 = area * radial_integral(profile, |_, y| y[0].powf(q0), slack * (lu * q0 - n))?;
    let a2 = match profile.regime {
        Regime::Super => {
            Some(area * radial_integral(profile, |_, y| y[2].powf(p), (n - 2.0) * p - n)?)
        }
        _ => None,
    };
    let psi0 = |r: f64, y: [f64; 4]| r * y[1] + n * y[0] / (q0 + 1.0);
    let rate_uu = slack * (lu * (q0 + 1.0) - n);
    let a3 = area
        * radial_integral(
            profile,
            |r, y| y[0].powf(q0) * y[0].ln() * psi0(r, y),
            0.95 * rate_uu,
        )?;
    let psi0_moment = area * radial_integral(profile, |r, y| y[0].powf(q0) * psi0(r, y), rate_uu)?;
    let j_u = area * radial_integral(profile, |_, y| y[0].powf(q0 + 1.0), rate_uu)?;
    let j_v = area
        * radial_integral(
            profile,
            |_, y| y[2].powf(p + 1.0),
            (n - 2.0) * (p + 1.0) - n,
        )?;
    // ∫ x₁² dσ over the sphere of radius r is r²|S|/N
    let a1_alt = -q0 * area / n
        * radial_integral(
            profile,
            |r, y| y[0].powf(q0 - 1.0) * y[1] * r,
            slack * (lu * q0 - n),
        )?;

    let s = j_u.powf((p * q0 - 1.0) / (p * (q0 + 1.0)));
    // |ΔU|^{(p+1)/p} = V^{p+1}
    let s_alt = j_v / j_u.powf((p + 1.0) / (p * (q0 + 1.0)));

    let last = profile.grid.len() - 1;
    let rho = profile.grid.nodes()[last];
    let y = [
        profile.u[last],
        profile.du[last],
        profile.v[last],
        profile.dv[last],
    ];
    let boundary = area
        * rho.powf(n - 1.0)
        * (rho * y[1] * y[3]
            + rho * (y[2].powf(p + 1.0) / (p + 1.0) + y[0].powf(q0 + 1.0) / (q0 + 1.0))
            + n * (y[2] * y[1] / (p + 1.0) + y[0] * y[3] / (q0 + 1.0)));

    Ok(BubbleConstants {
        n: exp.n,
        p,
        q0,
        regime: profile.regime,
        a: profile.a,
        b: profile.b,
        a1,
        a2,
        a3,
        s,
        s_alt,
        kappa0: (profile.regime == Regime::Super).then(|| exp.kappa0()),
        kappa1: None,
        j_u,
        j_v,
        a3_closed: n / (q0 + 1.0).powi(2) * j_u,
        psi0_moment,
        a1_alt,
        pohozaev_boundary: boundary.abs() / j_u,
    })
}

impl BubbleConstants {
    /// A₂, or `DivergentIntegral` outside the super regime.
    pub fn a2(&self) -> Result<f64> {
        self.a2.ok_or_else(|| {
            Error::DivergentIntegral(format!("∫V^p diverges for p = {} ≤ N/(N−2)", self.p))
        })
    }

    /// ‖U‖_{L^{q₀+1}}.
    pub fn norm_u(&self) -> f64 {
        self.j_u.powf(1.0 / (self.q0 + 1.0))
    }

    /// S^{p(q₀+1)/(pq₀−1)}, the power that enters C₀.
    pub fn s_power(&self) -> f64 {
        self.s
            .powf(self.p * (self.q0 + 1.0) / (self.p * self.q0 - 1.0))
    }
}

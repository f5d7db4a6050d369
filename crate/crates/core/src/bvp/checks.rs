//! Diagnostics of computed solutions against the ε → 0 statements: the
//! Pohozaev identity, convergence of the rescaled profile, blow-up rates,
//! outer profiles and decay envelopes.

use super::BvpSolution;
use crate::bubble::{RadialProfile, Regime};
use crate::error::{Error, Result};
use crate::greens::{wtg_center, GreensBundle};
use crate::numerics::{fit_free_exponent, sphere_area};
use crate::reduced_energy::RateRecord;
use serde::{Deserialize, Serialize};

/// Terms of the local Pohozaev identity on B(0, ρ), all divided by |𝕊^{N−1}|
/// and written in the variables of the normalized shot at radius λρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevTerms {
    /// ε ∫_{B_ρ} ∇u·∇v.
    pub lhs: f64,
    /// ρ∫(2∂_νu∂_νv − ∇u·∇v), ρ∫v^{p+1}/(p+1), ρ∫u^{q+1}/(q+1),
    /// N∫v∂_νu/(p+1), N∫u∂_νv/(q+1).
    pub boundary: [f64; 5],
    /// |lhs − Σ boundary| over the largest single term.
    pub residual: f64,
}

/// The Pohozaev terms with u replaced by `u_scale`·u (1 for the solution).
pub fn pohozaev_terms(sol: &BvpSolution, rho: f64, u_scale: f64) -> PohozaevTerms {
    let n = sol.exp.nf();
    let (p, q, eps) = (sol.exp.p, sol.exp.q_eps, sol.exp.eps);
    let r = sol.lambda * rho;
    let c = u_scale;
    let lhs = eps * c * sol.shot_integral(r, &|t, y| t.powf(n - 1.0) * y[1] * y[3]);
    let y = sol.shot_state(r);
    let (u, du, v, dv) = (c * y[0], c * y[1], y[2], y[3]);
    let boundary = [
        r.powf(n) * du * dv,
        r.powf(n) * v.powf(p + 1.0) / (p + 1.0),
        r.powf(n) * u.powf(q + 1.0) / (q + 1.0),
        n * r.powf(n - 1.0) * v * du / (p + 1.0),
        n * r.powf(n - 1.0) * u * dv / (q + 1.0),
    ];
    let largest = boundary.iter().fold(lhs.abs(), |m, b| m.max(b.abs()));
    let residual = (lhs - boundary.iter().sum::<f64>()).abs() / largest;
    PohozaevTerms {
        lhs,
        boundary,
        residual,
    }
}

/// Relative residual of the Pohozaev identity on B(0, ρ).
pub fn pohozaev_residual(sol: &BvpSolution, rho: f64) -> f64 {
    pohozaev_terms(sol, rho, 1.0).residual
}

/// sup_{r ≤ r_cmp} |λ^{−α}u(r/λ) − U(r)| + |λ^{−β}v(r/λ) − V(r)| for the bubble
/// (U, V) = `profile`.
pub fn rescaled_profile_distance(sol: &BvpSolution, profile: &RadialProfile, r_cmp: f64) -> f64 {
    rescaled_profile_distance_scaled(sol, profile, 1.0, r_cmp)
}

/// As [`rescaled_profile_distance`] against the bubble of scale μ,
/// (μ^{−N/(q₀+1)}U(r/μ), μ^{−N/(p+1)}V(r/μ)).
pub fn rescaled_profile_distance_scaled(
    sol: &BvpSolution,
    profile: &RadialProfile,
    mu: f64,
    r_cmp: f64,
) -> f64 {
    let (a0, b0) = (profile.exp.alpha0(), profile.exp.beta0());
    let samples = 4000;
    (0..=samples)
        .map(|i| {
            let r = r_cmp * i as f64 / samples as f64;
            let y = sol.shot_state(r);
            let z = profile.state_at(r / mu);
            (y[0] - mu.powf(-a0) * z[0]).abs() + (y[2] - mu.powf(-b0) * z[2]).abs()
        })
        .fold(0.0, f64::max)
}

/// The regime's blow-up product P(ε) = ε·M^σ, divided by log M when the
/// rate is log-corrected (M = sup u).
pub fn rate_product(sol: &BvpSolution, rates: &RateRecord) -> f64 {
    let m = sol.sup_u;
    let p = sol.exp.eps * m.powf(rates.sup_power);
    if rates.log_corrected {
        p / m.ln()
    } else {
        p
    }
}

/// Extrapolation of P(ε) → ε = 0 against the predicted limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    /// (ε, P(ε)) along the sweep.
    pub products: Vec<[f64; 2]>,
    /// L of the fit P = L + c ε^σ to the last four points.
    pub extrapolated: f64,
    pub sigma: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// |P − predicted| at the last three points.
    pub trend_distances: Vec<f64>,
    pub trend_decreasing: bool,
}

pub fn blowup_rate_check(sweep: &[BvpSolution], rates: &RateRecord) -> Result<RateCheck> {
    if sweep.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: sweep.len(),
        });
    }
    let products: Vec<[f64; 2]> = sweep
        .iter()
        .map(|s| [s.exp.eps, rate_product(s, rates)])
        .collect();
    let tail: Vec<(f64, f64)> = products[products.len() - 4..]
        .iter()
        .map(|v| (v[0], v[1]))
        .collect();
    let fit = fit_free_exponent(&tail, 0.02, 3.0)?;
    let trend_distances: Vec<f64> = products[products.len() - 3..]
        .iter()
        .map(|v| (v[1] - rates.limit).abs())
        .collect();
    let trend_decreasing = trend_distances.windows(2).all(|w| w[1] < w[0]);
    Ok(RateCheck {
        products,
        extrapolated: fit.limit,
        sigma: fit.sigma,
        predicted: rates.limit,
        ratio: fit.limit / rates.limit,
        trend_distances,
        trend_decreasing,
    })
}

/// Comparison of the outer solution with its Green-function limit on
/// 0.3 ≤ |x| ≤ 0.9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterCheck {
    /// sup |M v(r)/(c_v G(r,0)) − 1| with c_v = ‖U‖_{L^{q₀}}^{q₀}.
    pub v_deviation: f64,
    /// Least-squares multiplier of G(r,0) fitted to M v(r).
    pub v_multiplier: f64,
    /// The predicted multiplier c_v.
    pub v_coefficient: f64,
    /// The same for the normalized u-profile (G̃ in the sub regime).
    pub u_deviation: f64,
    pub u_multiplier: f64,
    pub u_coefficient: f64,
}

pub fn outer_profile_check(
    sol: &BvpSolution,
    bundle: &GreensBundle,
    rates: &RateRecord,
) -> Result<OuterCheck> {
    let n = bundle.n();
    let m = sol.sup_u;
    let u_norm = m.powf(rates.outer_u_power) / if rates.log_corrected { m.ln() } else { 1.0 };
    let (mut dv, mut du) = (0.0f64, 0.0f64);
    let (mut sv, mut gv, mut su, mut gu) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..=60 {
        let r = 0.3 + 0.6 * i as f64 / 60.0;
        let mut x = vec![0.0; n];
        x[0] = r;
        let g = bundle.green(&x, &vec![0.0; n])?;
        let model_u = if rates.regime == Regime::Sub {
            wtg_center(bundle, r)?
        } else {
            g
        };
        let y = sol.state_at(r);
        let ov = m * y[2];
        let ou = u_norm * y[0];
        dv = dv.max((ov / (rates.outer_v * g) - 1.0).abs());
        du = du.max((ou / (rates.outer_u * model_u) - 1.0).abs());
        sv += ov * g;
        gv += g * g;
        su += ou * model_u;
        gu += model_u * model_u;
    }
    Ok(OuterCheck {
        v_deviation: dv,
        v_multiplier: sv / gv,
        v_coefficient: rates.outer_v,
        u_deviation: du,
        u_multiplier: su / gu,
        u_coefficient: rates.outer_u,
    })
}

/// Smallest constants C in the decay envelopes
/// v ≤ C λ^{β−(N−2)} |x|^{2−N} and the regime's u-envelope, which in the
/// variables of the normalized shot read V R^{N−2} ≤ C and
/// U R^{N−2} ≤ C (super), U R^{N−2}/log(R+2) ≤ C (Serrin),
/// U R^{(N−2)p−2} ≤ C (sub).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub v: f64,
    pub u: f64,
}

pub fn envelope_constants(sol: &BvpSolution) -> EnvelopeConstants {
    let n = sol.exp.nf();
    let p = sol.exp.p;
    let regime = sol.exp.regime();
    let (mut cv, mut cu) = (0.0f64, 0.0f64);
    for (r, y) in sol.shot_nodes() {
        cv = cv.max(y[2] * r.powf(n - 2.0));
        let u = match regime {
            Regime::Super => y[0] * r.powf(n - 2.0),
            Regime::Serrin => y[0] * r.powf(n - 2.0) / (r + 2.0).ln(),
            Regime::Sub => y[0] * r.powf((n - 2.0) * p - 2.0),
        };
        cu = cu.max(u);
    }
    EnvelopeConstants { v: cv, u: cu }
}

/// ∫_Ω |Δu|^{(p+1)/p} = ∫_Ω v^{p+1}, the energy surrogate that stays bounded
/// while sup u diverges.
pub fn energy_proxy(sol: &BvpSolution) -> f64 {
    let n = sol.exp.nf();
    let p = sol.exp.p;
    let scale = sol.lambda.powf(sol.exp.beta_eps * (p + 1.0) - n);
    let r_end = sol.lambda;
    sphere_area::<f64>(sol.exp.n)
        * scale
        * sol.shot_integral(r_end, &|t, y| t.powf(n - 1.0) * y[2].max(0.0).powf(p + 1.0))
}

/// Monotonicity statements along a continuation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationChecks {
    pub sup_u_increasing: bool,
    /// |λ^ε − 1| along the sweep and whether it decreases.
    pub lambda_eps_gap: Vec<f64>,
    pub lambda_eps_decreasing: bool,
    pub profile_distance: Vec<f64>,
    pub profile_distance_decreasing: bool,
    /// distance / μ^{min{N−2,(N−2)p−2}}, with the extra |log μ| at p = N/(N−2).
    pub distance_ratio: Vec<f64>,
    pub energy_proxy: Vec<f64>,
    /// (max − min)/max of the energy proxy.
    pub energy_spread: f64,
    pub envelopes: Vec<EnvelopeConstants>,
    /// The k ≥ 2 separation statement has no content for one bubble.
    pub multi_bubble_separation: String,
}

pub fn continuation_checks(sweep: &[BvpSolution], profile: &RadialProfile) -> ContinuationChecks {
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let sups: Vec<f64> = sweep.iter().map(|s| s.sup_u).collect();
    let gap: Vec<f64> = sweep
        .iter()
        .map(|s| (s.lambda.powf(s.exp.eps) - 1.0).abs())
        .collect();
    let dist: Vec<f64> = sweep
        .iter()
        .map(|s| rescaled_profile_distance(s, profile, 20.0))
        .collect();
    let ratio: Vec<f64> = sweep
        .iter()
        .zip(&dist)
        .map(|(s, d)| {
            let n = s.exp.nf();
            let bound = s.mu.powf((n - 2.0).min((n - 2.0) * s.exp.p - 2.0));
            match s.exp.regime() {
                Regime::Serrin => d / (bound * s.mu.ln().abs()),
                _ => d / bound,
            }
        })
        .collect();
    let energy: Vec<f64> = sweep.iter().map(energy_proxy).collect();
    let (lo, hi) = energy
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    ContinuationChecks {
        sup_u_increasing: increasing(&sups),
        lambda_eps_decreasing: decreasing(&gap),
        lambda_eps_gap: gap,
        profile_distance_decreasing: decreasing(&dist),
        profile_distance: dist,
        distance_ratio: ratio,
        energy_spread: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
        energy_proxy: energy,
        envelopes: sweep.iter().map(envelope_constants).collect(),
        multi_bubble_separation: "not applicable: single bubble on the ball".into(),
    }
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub sup_u: f64,
    pub lambda: f64,
    pub product: f64,
    pub pohozaev_residual: f64,
    pub profile_distance: f64,
    pub outer_check: f64,
}

pub fn sweep_rows(
    sweep: &[BvpSolution],
    profile: &RadialProfile,
    bundle: &GreensBundle,
    rates: &RateRecord,
) -> Result<Vec<SweepRow>> {
    sweep
        .iter()
        .map(|s| {
            Ok(SweepRow {
                eps: s.exp.eps,
                sup_u: s.sup_u,
                lambda: s.lambda,
                product: rate_product(s, rates),
                pohozaev_residual: pohozaev_residual(s, 0.5),
                profile_distance: rescaled_profile_distance(s, profile, 20.0),
                outer_check: outer_profile_check(s, bundle, rates)?.v_deviation,
            })
        })
        .collect()
}

/// CSV with a header line and 17 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("eps,sup_u,lambda,product,pohozaev_residual,profile_distance,outer_check\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.eps,
            r.sup_u,
            r.lambda,
            r.product,
            r.pohozaev_residual,
            r.profile_distance,
            r.outer_check
        ));
    }
    out
}

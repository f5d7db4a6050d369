//! Bubble, reduced energy and BVP sweep for one (N, p), computed once and
//! shared by the `sweep` and `verify` commands.

use crate::config::Tolerances;
use lane_emden::bubble::{
    make_exponents, solve_ground_state_with, GroundStateOptions, RadialProfile, Regime,
};
use lane_emden::bvp::*;
use lane_emden::greens::{Configuration, GreensBundle};
use lane_emden::reduced_energy::{CriticalPointReport, RateRecord, ReducedEnergy};
use lane_emden::Result;
use serde::Serialize;
use std::time::{Duration, Instant};

/// The bubble and its reduced energy.
pub struct Setup {
    pub profile: RadialProfile,
    pub energy: ReducedEnergy,
}

pub fn setup(n: usize, p: f64, tol: &Tolerances) -> Result<Setup> {
    let exp = make_exponents(n, p, 0.0)?;
    let mut opts = GroundStateOptions::default();
    if let Some(r) = tol.ode_rtol {
        opts.ode_rtol = r;
    }
    let profile = solve_ground_state_with(&exp, &opts)?;
    let mut energy = ReducedEnergy::from_profile(&profile)?;
    if let Some(q) = tol.quad_tol {
        energy.volume.rel_tol = q;
    }
    Ok(Setup { profile, energy })
}

/// Newton tolerance of the critical-point search unless overridden.
pub fn newton_tol(tol: &Tolerances) -> f64 {
    tol.newton_tol.unwrap_or(1e-10)
}

/// Pohozaev diagnostics at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevPoint {
    pub eps: f64,
    /// Residuals at ρ = 0.3, 0.5, 0.7.
    pub residual: [f64; 3],
    /// Residual at ρ = 0.5 with u replaced by 1.01·u.
    pub perturbed: f64,
}

pub struct SweepStudy {
    pub n: usize,
    pub p: f64,
    pub regime: Regime,
    pub setup: Setup,
    pub bundle: GreensBundle,
    pub critical: CriticalPointReport,
    pub rates: RateRecord,
    pub sweep: Vec<BvpSolution>,
    pub rows: Vec<SweepRow>,
    pub rate: RateCheck,
    pub continuation: ContinuationChecks,
    pub outer_last: OuterCheck,
    pub pohozaev: Vec<PohozaevPoint>,
    /// Wall time of the continuation sweep alone.
    pub sweep_time: Duration,
}

pub fn run_sweep(n: usize, p: f64, schedule: &[f64], tol: &Tolerances) -> Result<SweepStudy> {
    let setup = setup(n, p, tol)?;
    let exp = setup.profile.exp;
    let critical = setup
        .energy
        .find_critical(&Configuration::single(0.1, vec![0.0; n]), newton_tol(tol))?;
    let rates = setup.energy.predicted_rates(&critical)?;
    let bundle = GreensBundle::unit_ball(exp)?;
    let mut opts = BvpOptions::default();
    if let Some(r) = tol.ode_rtol {
        opts.rtol = r;
    }
    let start = Instant::now();
    let sweep = continuation_sweep(&exp, schedule, Seed::Bubble(&setup.profile), &opts)?;
    let sweep_time = start.elapsed();
    let rows = sweep_rows(&sweep, &setup.profile, &bundle, &rates)?;
    let rate = blowup_rate_check(&sweep, &rates)?;
    let continuation = continuation_checks(&sweep, &setup.profile);
    let outer_last = outer_profile_check(sweep.last().expect("non-empty sweep"), &bundle, &rates)?;
    let pohozaev = sweep
        .iter()
        .map(|s| PohozaevPoint {
            eps: s.exp.eps,
            residual: [0.3, 0.5, 0.7].map(|rho| pohozaev_residual(s, rho)),
            perturbed: pohozaev_terms(s, 0.5, 1.01).residual,
        })
        .collect();
    Ok(SweepStudy {
        n,
        p,
        regime: exp.regime(),
        setup,
        bundle,
        critical,
        rates,
        sweep,
        rows,
        rate,
        continuation,
        outer_last,
        pohozaev,
        sweep_time,
    })
}

/// JSON summary of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary<'a> {
    pub schema: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub regime: Regime,
    pub predicted: &'a RateRecord,
    pub rate: &'a RateCheck,
    pub continuation: &'a ContinuationChecks,
    pub outer_last: &'a OuterCheck,
    pub pohozaev: &'a [PohozaevPoint],
}

impl SweepStudy {
    pub fn summary(&self) -> SweepSummary<'_> {
        SweepSummary {
            schema: 1,
            n: self.n,
            p: self.p,
            regime: self.regime,
            predicted: &self.rates,
            rate: &self.rate,
            continuation: &self.continuation,
            outer_last: &self.outer_last,
            pohozaev: &self.pohozaev,
        }
    }
}

//! Command-line front end: bubble solves, constant tables, Green's-function
//! values, reduced-energy searches, BVP sweeps and the acceptance battery.
//! Every command writes its artifacts into the output directory, atomically
//! and deterministically.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod config;
pub mod study;

use battery::Criterion;
use config::{Command, RunConfig, Suite};
use lane_emden::bubble::{
    compute_constants, make_exponents, solve_ground_state_with, GroundStateOptions, Regime,
};
use lane_emden::greens::{
    bar_h, hat_h, wth_theta, wth_theta_center_series, Configuration, GreensBundle, HarmonicValue,
};
use lane_emden::reduced_energy::ReducedReport;
use lane_emden::report::{to_json, write_atomic};
use serde::Serialize;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable with the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LANE_EMDEN_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] lane_emden::Error),
}

impl CliError {
    /// 2 for bad configuration, 3 for numerical failure, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library(lane_emden::Error::Io(_)) => 1,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(_) => 2,
        }
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// False only when `verify` found a failing check.
    pub passed: bool,
    /// Human-readable lines for the terminal.
    pub lines: Vec<String>,
}

/// Rejects non-finite numbers: every optional field of the emitted types is
/// skipped when absent, so a `null` can only come from NaN or ±∞.
fn json(value: &impl Serialize, what: &str) -> Result<String, CliError> {
    let s = to_json(value)?;
    if s.contains("null") {
        return Err(lane_emden::Error::NonFinite(what.into()).into());
    }
    Ok(s)
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.files.push(path);
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let mut w = Writer {
        dir: cfg.output_dir.clone(),
        files: Vec::new(),
    };
    let (passed, lines) = match cfg.command {
        Command::Bubble => bubble(cfg, &mut w)?,
        Command::Constants => constants(cfg, &mut w)?,
        Command::Greens => greens(cfg, &mut w)?,
        Command::Reduced => reduced(cfg, &mut w)?,
        Command::Sweep => sweep(cfg, &mut w)?,
        Command::Verify => verify(cfg, &mut w)?,
    };
    Ok(RunOutcome {
        files: w.files,
        passed,
        lines,
    })
}

fn ground_state(cfg: &RunConfig) -> Result<lane_emden::bubble::RadialProfile, CliError> {
    let mut opts = GroundStateOptions::default();
    if let Some(r) = cfg.tolerances.ode_rtol {
        opts.ode_rtol = r;
    }
    Ok(solve_ground_state_with(
        &make_exponents(cfg.n, cfg.p, 0.0)?,
        &opts,
    )?)
}

#[derive(Serialize)]
struct BubbleJson {
    schema: u32,
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    q0: f64,
    regime: Regime,
    /// V(0) of the bubble normalized by U(0) = 1.
    s0: f64,
    #[serde(rename = "A1")]
    a1: f64,
    #[serde(rename = "A2", skip_serializing_if = "Option::is_none")]
    a2: Option<f64>,
    #[serde(rename = "A3")]
    a3: f64,
    /// |A₃ − N/(q₀+1)² ∫U^{q₀+1}| / A₃.
    #[serde(rename = "A3_err")]
    a3_err: f64,
    #[serde(rename = "S")]
    s: f64,
    /// Relative disagreement of the two S formulas.
    #[serde(rename = "S_err")]
    s_err: f64,
    a: f64,
    b: f64,
    /// Relative misfit of the far-field laws behind a and b.
    ab_fit_err: f64,
    ode_residual: f64,
}

fn bubble(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let profile = ground_state(cfg)?;
    let c = compute_constants(&profile)?;
    let fit = lane_emden::bubble::fit_decay_constants(&profile)?;
    let out = BubbleJson {
        schema: 1,
        n: cfg.n,
        p: cfg.p,
        q0: c.q0,
        regime: c.regime,
        s0: profile.s,
        a1: c.a1,
        a2: c.a2,
        a3: c.a3,
        a3_err: (c.a3 - c.a3_closed).abs() / c.a3,
        s: c.s,
        s_err: (c.s - c.s_alt).abs() / c.s,
        a: c.a,
        b: c.b,
        ab_fit_err: fit.residual_u.max(fit.residual_v),
        ode_residual: profile.ode_residual(),
    };
    let stem = format!("bubble_{}", cfg.stem());
    w.put(&format!("{stem}.csv"), &profile.to_csv())?;
    w.put(&format!("{stem}.json"), &json(&out, "bubble constants")?)?;
    Ok((
        true,
        vec![format!(
            "{} regime, A1 = {:.10e}, S = {:.10e}",
            c.regime.name(),
            c.a1,
            c.s
        )],
    ))
}

fn constants(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let profile = ground_state(cfg)?;
    let c = compute_constants(&profile)?;
    // name, value, independent check, relative disagreement
    let mut rows: Vec<(&str, f64, Option<f64>)> = vec![
        ("a", c.a, None),
        ("b", c.b, None),
        ("A1", c.a1, Some(c.a1_alt)),
        ("A3", c.a3, Some(c.a3_closed)),
        ("S", c.s, Some(c.s_alt)),
        ("int_U^(q0+1)", c.j_u, None),
        ("int_V^(p+1)", c.j_v, None),
        ("int_U^q0_Psi0", c.psi0_moment, None),
    ];
    if let Some(a2) = c.a2 {
        rows.insert(3, ("A2", a2, None));
    }
    let mut csv = String::from("name,value,check,rel_diff\n");
    for (name, v, chk) in &rows {
        lane_emden::report::ensure_finite(name, &[*v])?;
        match chk {
            Some(k) => csv.push_str(&format!(
                "{name},{v:.16e},{k:.16e},{:.16e}\n",
                (v - k).abs() / v.abs()
            )),
            None => csv.push_str(&format!("{name},{v:.16e},,\n")),
        }
    }
    w.put(&format!("constants_{}.csv", cfg.stem()), &csv)?;
    Ok((
        true,
        vec![format!(
            "{} constants for N = {}, p = {}",
            rows.len(),
            cfg.n,
            cfg.p
        )],
    ))
}

#[derive(Serialize)]
struct GreensJson {
    schema: u32,
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    regime: Regime,
    gamma_n: f64,
    tau_0: f64,
    /// G(r e₁, 0) at r = 0.1, 0.3, …, 0.9.
    green_radial: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hat_h_0: Option<HarmonicValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bar_h_0: Option<HarmonicValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_tilde_0: Option<f64>,
    /// |θ̃(0) by volume quadrature − series value| / series value.
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_tilde_0_err: Option<f64>,
}

fn greens(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let b = GreensBundle::unit_ball(make_exponents(cfg.n, cfg.p, 0.0)?)?;
    let n = cfg.n;
    let origin = vec![0.0; n];
    let green_radial = (0..5)
        .map(|i| {
            let r = 0.1 + 0.2 * i as f64;
            let mut x = vec![0.0; n];
            x[0] = r;
            Ok([r, b.green(&x, &origin)?])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let regime = b.regime();
    let hat = matches!(regime, Regime::Sub | Regime::Serrin);
    let (theta, theta_err) = if regime == Regime::Sub {
        let series = wth_theta_center_series(&b)?;
        let vol = wth_theta(&b, &origin)?;
        (Some(series), Some((vol - series).abs() / series.abs()))
    } else {
        (None, None)
    };
    let out = GreensJson {
        schema: 1,
        n,
        p: cfg.p,
        regime,
        gamma_n: b.gamma_n,
        tau_0: b.robin(&origin)?,
        green_radial,
        hat_h_0: if hat {
            Some(hat_h(&b, &origin, &origin)?)
        } else {
            None
        },
        bar_h_0: if regime == Regime::Sub {
            Some(bar_h(&b, &origin, &origin)?)
        } else {
            None
        },
        theta_tilde_0: theta,
        theta_tilde_0_err: theta_err,
    };
    w.put(
        &format!("greens_{}.json", cfg.stem()),
        &json(&out, "Green's function values")?,
    )?;
    Ok((true, vec![format!("tau(0) = {:.16e}", out.tau_0)]))
}

#[derive(Serialize)]
struct ReducedJson {
    schema: u32,
    k: usize,
    seed_config: Configuration,
    #[serde(flatten)]
    report: ReducedReport,
    /// (C₀/((N−2)τ(0)))^{1/(N−2)} for one bubble outside the sub regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    d_star_closed_form: Option<f64>,
    /// Newton tolerance on ‖∇Υ‖∞.
    tolerance: f64,
}

fn reduced(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let s = study::setup(cfg.n, cfg.p, &cfg.tolerances)?;
    let seed_config = match &cfg.seed_config {
        Some(c) => c.clone(),
        None => default_seed(cfg.n, cfg.k),
    };
    let tol = study::newton_tol(&cfg.tolerances);
    let crit = s.energy.find_critical(&seed_config, tol)?;
    let report = s.energy.report(&crit)?;
    let d_star_closed_form = if cfg.k == 1 && s.energy.regime != Regime::Sub {
        Some(s.energy.single_bubble_d_star()?)
    } else {
        None
    };
    let line = format!(
        "d* = {:?}, |grad| = {:.3e}",
        report.d_star, report.grad_norm
    );
    let out = ReducedJson {
        schema: 1,
        k: cfg.k,
        seed_config,
        report,
        d_star_closed_form,
        tolerance: tol,
    };
    w.put(
        &format!("reduced_{}_k{}.json", cfg.stem(), cfg.k),
        &json(&out, "reduced-energy report")?,
    )?;
    Ok((true, vec![line]))
}

/// k points evenly spaced on the circle of radius 0.3 in the (x₁, x₂)
/// plane (the center for k = 1), all with d̃ = 0.1.
fn default_seed(n: usize, k: usize) -> Configuration {
    let points = (0..k)
        .map(|i| {
            let mut x = vec![0.0; n];
            if k > 1 {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                x[0] = 0.3 * t.cos();
                x[1] = 0.3 * t.sin();
            }
            x
        })
        .collect();
    Configuration {
        deltas: vec![0.1; k],
        points,
    }
}

fn sweep(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let st = study::run_sweep(cfg.n, cfg.p, &cfg.eps_schedule, &cfg.tolerances)?;
    let stem = format!("sweep_{}", cfg.stem());
    w.put(
        &format!("{stem}.csv"),
        &lane_emden::bvp::sweep_csv(&st.rows),
    )?;
    w.put(
        &format!("{stem}.json"),
        &json(&st.summary(), "sweep summary")?,
    )?;
    Ok((
        true,
        vec![format!(
            "extrapolated {:.6e}, predicted {:.6e}, ratio {:.4}",
            st.rate.extrapolated, st.rate.predicted, st.rate.ratio
        )],
    ))
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    schema: u32,
    suite: Suite,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    passed: bool,
    criteria: &'a [Criterion],
}

/// Runs the battery of `suite` at (n, p); `All` ignores them.
pub fn battery(
    suite: Suite,
    n: usize,
    p: f64,
    cfg: &RunConfig,
) -> Result<Vec<Criterion>, CliError> {
    use battery::*;
    let tol = &cfg.tolerances;
    let sched = &cfg.eps_schedule;
    Ok(match suite {
        Suite::Bubble => vec![
            bubble_identities(&[(n, p)], tol)?,
            symmetric_reduction(n, tol)?,
        ],
        Suite::Greens => vec![greens_trivial(&[n])?],
        Suite::Super | Suite::Sub | Suite::Serrin => {
            let st = study::run_sweep(n, p, sched, tol)?;
            let mut out = Vec::new();
            match suite {
                Suite::Super => out.push(reduced_oracle(n, p, tol, cfg.seed)?),
                Suite::Serrin => out.push(lambert_schedule(n, tol)?),
                _ => {}
            }
            out.push(pohozaev(&[&st]));
            out.push(profile_convergence(&[&st]));
            match suite {
                Suite::Super => out.push(rate_ratio(8, &st)),
                Suite::Sub => out.push(rate_ratio(9, &st)),
                _ => out.push(serrin_trend(&st)),
            }
            out.push(outer_profiles(&[&st]));
            out
        }
        Suite::All => {
            // the three sweeps are independent
            let (sup, sub, ser) = std::thread::scope(|s| {
                let a = s.spawn(|| study::run_sweep(4, 2.5, sched, tol));
                let b = s.spawn(|| study::run_sweep(5, 1.6, sched, tol));
                let c = s.spawn(|| study::run_sweep(4, 2.0, sched, tol));
                (a.join().unwrap(), b.join().unwrap(), c.join().unwrap())
            });
            let (sup, sub, ser) = (sup?, sub?, ser?);
            let all = [&sup, &sub, &ser];
            vec![
                bubble_identities(&identity_cases(), tol)?,
                symmetric_reduction(4, tol)?,
                greens_trivial(&[4, 5])?,
                reduced_oracle(4, 2.5, tol, cfg.seed)?,
                lambert_schedule(4, tol)?,
                pohozaev(&all),
                profile_convergence(&all),
                rate_ratio(8, &sup),
                rate_ratio(9, &sub),
                serrin_trend(&ser),
                outer_profiles(&all),
            ]
        }
    })
}

fn verify(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, Vec<String>), CliError> {
    let criteria = battery(cfg.suite, cfg.n, cfg.p, cfg)?;
    let passed = criteria.iter().all(|c| c.passed);
    let all = cfg.suite == Suite::All;
    let out = VerifyJson {
        schema: 1,
        suite: cfg.suite,
        n: (!all).then_some(cfg.n),
        p: (!all).then_some(cfg.p),
        passed,
        criteria: &criteria,
    };
    let name = if all {
        "verify_all.json".to_string()
    } else {
        format!("verify_{}_{}.json", cfg.suite.name(), cfg.stem())
    };
    w.put(&name, &json(&out, "verification report")?)?;
    Ok((passed, criteria.iter().map(Criterion::line).collect()))
}

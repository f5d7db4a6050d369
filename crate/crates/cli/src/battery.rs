//! The acceptance criteria as named, serializable checks.

use crate::config::Tolerances;
use crate::study::{newton_tol, setup, SweepStudy};
use lane_emden::bubble::{
    compute_constants, make_exponents, solve_ground_state_with, GroundStateOptions, Regime,
};
use lane_emden::greens::{bar_h, hat_h, Configuration, GreensBundle};
use lane_emden::numerics::{integrate_ode, logspace};
use lane_emden::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// "<=" or ">=".
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: "<=",
            bound,
            passed: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">=",
            bound,
            passed: value >= bound,
        }
    }

    /// A yes/no property, recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall time; kept out of the JSON so that reports are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Criterion {
    pub fn new(id: u8, title: &str, checks: Vec<Check>, elapsed: Duration) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self {
            id,
            title: title.into(),
            passed,
            checks,
            elapsed,
        }
    }

    /// "criterion 6 PASS|FAIL  title  (failing checks)".
    pub fn line(&self) -> String {
        let failing: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        let mut s = format!(
            "criterion {:>2} {}  {}  [{:.1} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64()
        );
        if !failing.is_empty() {
            s.push_str(&format!("  failing: {}", failing.join(", ")));
        }
        s
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// p values of the bubble-identity criterion, three per regime and the
/// Serrin exponent.
pub fn identity_cases() -> Vec<(usize, f64)> {
    vec![
        (4, 1.3),
        (4, 1.5),
        (4, 1.8),
        (4, 2.0),
        (4, 2.3),
        (4, 2.5),
        (4, 2.8),
        (5, 1.1),
        (5, 1.3),
        (5, 1.6),
        (5, 5.0 / 3.0),
        (5, 1.8),
        (5, 2.0),
        (5, 2.2),
    ]
}

/// Criterion 1: Decay-constant identities, the two S formulas, A₃ and ∫U^{q₀}Ψ⁰.
pub fn bubble_identities(cases: &[(usize, f64)], tol: &Tolerances) -> Result<Criterion> {
    let start = Instant::now();
    let mut opts = GroundStateOptions::default();
    if let Some(r) = tol.ode_rtol {
        opts.ode_rtol = r;
    }
    let mut checks = Vec::new();
    for &(n, p) in cases {
        let exp = make_exponents(n, p, 0.0)?;
        let profile = solve_ground_state_with(&exp, &opts)?;
        let c = compute_constants(&profile)?;
        let nf = n as f64;
        let tag = format!("N={n} p={p}");
        match exp.regime() {
            Regime::Sub => {
                let rhs = c.a * ((nf - 2.0) * p - 2.0) * (nf - (nf - 2.0) * p);
                checks.push(Check::at_most(
                    format!("{tag} b^p vs a[(N-2)p-2][N-(N-2)p]"),
                    rel(c.b.powf(p), rhs),
                    0.01,
                ));
            }
            Regime::Serrin => {
                checks.push(Check::at_most(
                    format!("{tag} b^p vs (N-2)a"),
                    rel(c.b.powf(p), (nf - 2.0) * c.a),
                    0.01,
                ));
            }
            Regime::Super => {
                checks.push(Check::at_most(
                    format!("{tag} a*A1 vs b*A2"),
                    rel(c.a * c.a1, c.b * c.a2()?),
                    0.01,
                ));
            }
        }
        checks.push(Check::at_most(
            format!("{tag} S two formulas"),
            rel(c.s_alt, c.s),
            0.005,
        ));
        checks.push(Check::at_most(
            format!("{tag} A3 closed form"),
            rel(c.a3, c.a3_closed),
            0.005,
        ));
        checks.push(Check::at_most(
            format!("{tag} int U^q0 Psi0 / A1"),
            c.psi0_moment.abs() / c.a1,
            0.005,
        ));
    }
    Ok(Criterion::new(
        1,
        "bubble identities",
        checks,
        start.elapsed(),
    ))
}

/// Criterion 2: At p = q₀ both components equal the scalar ground state
/// w'' + (N−1)w'/r + w^{(N+2)/(N−2)} = 0, w(0) = 1, shot independently.
pub fn symmetric_reduction(n: usize, tol: &Tolerances) -> Result<Criterion> {
    let start = Instant::now();
    let nf = n as f64;
    let pc = (nf + 2.0) / (nf - 2.0);
    let mut opts = GroundStateOptions::default();
    if let Some(r) = tol.ode_rtol {
        opts.ode_rtol = r;
    }
    let profile = solve_ground_state_with(&make_exponents(n, pc, 0.0)?, &opts)?;
    let r0 = 1e-6;
    let r1 = 2e3;
    let w0 = [1.0 - r0 * r0 / (2.0 * nf), -r0 / nf];
    let traj = integrate_ode(
        |r, y: &[f64], f: &mut [f64]| {
            f[0] = y[1];
            f[1] = -(nf - 1.0) / r * y[1] - y[0].max(0.0).powf(pc);
        },
        r0,
        r1,
        &w0,
        1e-13,
    )?;
    let mut sup_uw = 0.0f64;
    let mut sup_uv = 0.0f64;
    for (i, &r) in profile.grid.nodes().iter().enumerate() {
        if r > r1 {
            break;
        }
        let w = if r < r0 { 1.0 } else { traj.eval(r)[0] };
        sup_uw = sup_uw
            .max((profile.u[i] - w).abs())
            .max((profile.v[i] - w).abs());
        sup_uv = sup_uv.max((profile.u[i] - profile.v[i]).abs());
    }
    let checks = vec![
        Check::at_most(format!("N={n} sup |U - V|"), sup_uv, 1e-6),
        Check::at_most(format!("N={n} sup |U - w|, |V - w|"), sup_uw, 1e-6),
    ];
    Ok(Criterion::new(
        2,
        "symmetric-point reduction",
        checks,
        start.elapsed(),
    ))
}

/// Criterion 3: τ(0) = γ_N, ĥ(·,0) = γ_N (sub) or 0 (Serrin), h̄(·,0) = 1.
pub fn greens_trivial(dims: &[usize]) -> Result<Criterion> {
    let start = Instant::now();
    let mut checks = Vec::new();
    for &n in dims {
        let nf = n as f64;
        let sub = GreensBundle::unit_ball(make_exponents(
            n,
            0.5 * (2.0 / (nf - 2.0) + nf / (nf - 2.0)),
            0.0,
        )?)?;
        let serrin = GreensBundle::unit_ball(make_exponents(n, nf / (nf - 2.0), 0.0)?)?;
        let origin = vec![0.0; n];
        checks.push(Check::at_most(
            format!("N={n} tau(0) vs gamma_N"),
            rel(sub.robin(&origin)?, sub.gamma_n),
            1e-14,
        ));
        for r in [0.0, 0.5, 0.9] {
            let mut x = vec![0.0; n];
            x[0] = r * 0.6;
            x[n - 1] = r * 0.8;
            checks.push(Check::at_most(
                format!("N={n} |x|={r} hat_h sub vs gamma_N"),
                rel(hat_h(&sub, &x, &origin)?.value, sub.gamma_n),
                1e-8,
            ));
            checks.push(Check::at_most(
                format!("N={n} |x|={r} hat_h serrin"),
                hat_h(&serrin, &x, &origin)?.value.abs() / serrin.gamma_n,
                1e-8,
            ));
            checks.push(Check::at_most(
                format!("N={n} |x|={r} bar_h - 1"),
                (bar_h(&sub, &x, &origin)?.value - 1.0).abs(),
                1e-8,
            ));
        }
    }
    Ok(Criterion::new(
        3,
        "Green's function trivial values",
        checks,
        start.elapsed(),
    ))
}

/// Criterion 4: The one-bubble critical point against its closed form, and analytic
/// against difference gradients at random admissible configurations.
pub fn reduced_oracle(n: usize, p: f64, tol: &Tolerances, seed: u64) -> Result<Criterion> {
    let s = setup(n, p, tol)?;
    let start = Instant::now();
    let re = &s.energy;
    let d_star = re.single_bubble_d_star()?;
    let crit = re.find_critical(&Configuration::single(0.1, vec![0.0; n]), newton_tol(tol))?;
    let x_norm = crit.config.points[0]
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let mut checks = vec![
        Check::at_most(
            "d* vs closed form",
            rel(crit.config.deltas[0], d_star),
            1e-6,
        ),
        Check::at_most("|x*|", x_norm, 1e-6),
        Check::holds("Hessian sign +1", crit.hessian_det_sign == 1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 20 {
        let k = 1 + count % 3;
        let c = Configuration {
            deltas: (0..k).map(|_| rng.random_range(0.1..2.0)).collect(),
            points: (0..k)
                .map(|_| (0..n).map(|_| rng.random_range(-0.4..0.4)).collect())
                .collect(),
        };
        if !re.admissible(&c) {
            continue;
        }
        let g = re.grad_upsilon(&c)?;
        let fd = re.fd_gradient(&c, 1e-5)?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.iter().zip(&fd) {
            worst = worst.max((a - b).abs() / scale);
        }
        count += 1;
    }
    checks.push(Check::at_most(
        "max relative gradient mismatch (20 configs)",
        worst,
        1e-6,
    ));
    Ok(Criterion::new(
        4,
        "reduced-energy one-bubble oracle",
        checks,
        start.elapsed(),
    ))
}

/// Criterion 5: μ^{N−2} log μ = −ε along the Serrin schedule (with d̃ = 1).
pub fn lambert_schedule(n: usize, tol: &Tolerances) -> Result<Criterion> {
    let nf = n as f64;
    let s = setup(n, nf / (nf - 2.0), tol)?;
    let start = Instant::now();
    let mut worst = 0.0f64;
    for eps in logspace(1e-8, 1e-2, 25) {
        let mu = s.energy.mu_schedule(eps, 1.0)?;
        worst = worst.max(rel(mu.powf(nf - 2.0) * mu.ln(), -eps));
    }
    let checks = vec![Check::at_most(
        "max relative defect of mu^(N-2) log mu = -eps",
        worst,
        1e-10,
    )];
    Ok(Criterion::new(
        5,
        "Lambert schedule",
        checks,
        start.elapsed(),
    ))
}

fn tag(st: &SweepStudy) -> String {
    format!("N={} p={}", st.n, st.p)
}

/// Criterion 6: Pohozaev identity on solutions; perturbed non-solutions violate it.
pub fn pohozaev(studies: &[&SweepStudy]) -> Criterion {
    let mut checks = Vec::new();
    let mut time = Duration::ZERO;
    for st in studies {
        let worst = st.pohozaev.iter().fold(0.0f64, |m, q| m.max(q.residual[1]));
        let weakest = st
            .pohozaev
            .iter()
            .fold(f64::INFINITY, |m, q| m.min(q.perturbed));
        checks.push(Check::at_most(
            format!("{} max residual at rho=0.5", tag(st)),
            worst,
            1e-6,
        ));
        checks.push(Check::at_least(
            format!("{} min residual with u -> 1.01u", tag(st)),
            weakest,
            1e-3,
        ));
        time = time.max(st.sweep_time / st.sweep.len() as u32);
    }
    Criterion::new(6, "Pohozaev identity", checks, time)
}

/// Criterion 7: Convergence of the rescaled profile to the bubble.
pub fn profile_convergence(studies: &[&SweepStudy]) -> Criterion {
    let mut checks = Vec::new();
    let mut time = Duration::ZERO;
    for st in studies {
        let c = &st.continuation;
        checks.push(Check::holds(
            format!("{} distance decreasing", tag(st)),
            c.profile_distance_decreasing,
        ));
        checks.push(Check::at_most(
            format!("{} final distance", tag(st)),
            *c.profile_distance.last().unwrap(),
            0.05,
        ));
        time = time.max(st.sweep_time);
    }
    Criterion::new(7, "rescaled profile convergence", checks, time)
}

/// Criteria 8 and 9: Extrapolated blow-up rate within 15% of the prediction, with
/// a monotone trend.
pub fn rate_ratio(id: u8, st: &SweepStudy) -> Criterion {
    let title = if st.regime == Regime::Sub {
        "sub-regime blow-up rate"
    } else {
        "super-regime blow-up rate"
    };
    let checks = vec![
        Check::at_most(
            format!("{} |extrapolated/predicted - 1|", tag(st)),
            (st.rate.ratio - 1.0).abs(),
            0.15,
        ),
        Check::holds(
            format!("{} distance to the limit decreasing", tag(st)),
            st.rate.trend_decreasing,
        ),
    ];
    Criterion::new(id, title, checks, st.sweep_time)
}

/// Criterion 10: The log-corrected product approaches its limit.
pub fn serrin_trend(st: &SweepStudy) -> Criterion {
    let checks = vec![Check::holds(
        format!(
            "{} distance to the limit decreasing over the last three points",
            tag(st)
        ),
        st.rate.trend_decreasing && st.rates.log_corrected,
    )];
    Criterion::new(10, "Serrin log-corrected rate trend", checks, st.sweep_time)
}

fn spread(vals: &[f64]) -> f64 {
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    hi / lo - 1.0
}

/// Criterion 11: Green-function multiplier of the outer v and stable decay envelopes.
pub fn outer_profiles(studies: &[&SweepStudy]) -> Criterion {
    let mut checks = Vec::new();
    let mut time = Duration::ZERO;
    for st in studies {
        let o = &st.outer_last;
        checks.push(Check::at_most(
            format!("{} |fitted multiplier / ||U||_q0^q0 - 1|", tag(st)),
            rel(o.v_multiplier, o.v_coefficient),
            0.05,
        ));
        let env = &st.continuation.envelopes;
        let tail = &env[env.len() - 3..];
        let v: Vec<f64> = tail.iter().map(|e| e.v).collect();
        let u: Vec<f64> = tail.iter().map(|e| e.u).collect();
        checks.push(Check::at_most(
            format!("{} v-envelope spread (last three)", tag(st)),
            spread(&v),
            0.2,
        ));
        checks.push(Check::at_most(
            format!("{} u-envelope spread (last three)", tag(st)),
            spread(&u),
            0.2,
        ));
        time = time.max(st.sweep_time);
    }
    Criterion::new(11, "outer profiles and decay envelopes", checks, time)
}

//! Radial solutions of the nearly-critical system −Δu = v^p, −Δv = u^{q_ε}
//! in the unit ball with u = v = 0 on the boundary, and the checks of their
//! asymptotic behavior as ε → 0.
//!
//! Solutions come from the scaling invariance of the radial system: the
//! shot U(0) = 1, V(0) = s whose components vanish at a common radius R*
//! rescales to the ball by u(x) = λ^{α_ε} U(λ|x|), v(x) = λ^{β_ε} V(λ|x|)
//! with λ = R*.

mod checks;

pub use checks::{
    blowup_rate_check, continuation_checks, energy_proxy, envelope_constants, outer_profile_check,
    pohozaev_residual, pohozaev_terms, rate_product, rescaled_profile_distance,
    rescaled_profile_distance_scaled, sweep_csv, sweep_rows, ContinuationChecks, EnvelopeConstants,
    OuterCheck, PohozaevTerms, RateCheck, SweepRow,
};

use crate::bubble::{ExponentPair, Outcome, RadialProfile, RadialSystem, ShotMode};
use crate::error::{Error, Result};
use crate::numerics::{bisect_classifier, gauss_legendre, Grid1D};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvpOptions {
    /// Relative tolerance of the shooting integrator.
    pub rtol: f64,
    /// Number of graded panels of the output grid.
    pub panels: usize,
    /// Gauss points per panel.
    pub order: usize,
    /// Minimum number of grid nodes in |x| ≤ 10μ.
    pub core_nodes: usize,
    /// Largest accepted |V(R*)|/V(0) at the radius where U vanishes.
    pub boundary_tol: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            panels: 2000,
            order: 4,
            core_nodes: 200,
            boundary_tol: 1e-8,
        }
    }
}

/// Where the search for the shooting parameter starts.
#[derive(Debug, Clone, Copy)]
pub enum Seed<'a> {
    /// The previous solution of a continuation.
    Solution(&'a BvpSolution),
    /// The entire-space bubble, whose V(0) is the ε → 0 limit.
    Bubble(&'a RadialProfile),
    Cold,
}

/// A positive radial solution on the unit ball.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub exp: ExponentPair,
    /// Graded grid on [0, 1].
    pub grid: Grid1D<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    /// u(0) = max u.
    pub sup_u: f64,
    /// sup_u^{1/α_ε}; also the radius R* of the normalized shot.
    pub lambda: f64,
    pub mu: f64,
    /// V(0) of the normalized shot U(0) = 1.
    pub s: f64,
    /// |V(R*)|/V(0) of the normalized shot.
    pub boundary_mismatch: f64,
    /// Relative defect of the integrated radial equations on the grid.
    pub residual: f64,
    knots: Vec<f64>,
    states: Vec<[f64; 4]>,
}

impl BvpSolution {
    pub fn system(&self) -> RadialSystem {
        RadialSystem::new(self.exp.n, self.exp.p, self.exp.q_eps)
    }

    /// [U, U', V, V'] of the normalized shot at radius `r` ∈ [0, R*]; zero
    /// beyond R*.
    pub fn shot_state(&self, r: f64) -> [f64; 4] {
        let r = r.abs();
        if r <= self.knots[0] {
            return self.system().series(1.0, self.s, r);
        }
        let last = self.knots.len() - 1;
        if r >= self.knots[last] {
            return if r == self.knots[last] {
                self.states[last]
            } else {
                [0.0; 4]
            };
        }
        let j = self.knots.partition_point(|&x| x <= r).clamp(1, last) - 1;
        self.system().interpolate(
            self.knots[j],
            &self.states[j],
            self.knots[j + 1],
            &self.states[j + 1],
            r,
        )
    }

    /// [u, u', v, v'] at |x| = r in the ball.
    pub fn state_at(&self, r: f64) -> [f64; 4] {
        let (a, b, l) = (self.exp.alpha_eps, self.exp.beta_eps, self.lambda);
        let y = self.shot_state(l * r);
        [
            l.powf(a) * y[0],
            l.powf(a + 1.0) * y[1],
            l.powf(b) * y[2],
            l.powf(b + 1.0) * y[3],
        ]
    }

    /// Radial integral ∫_0^R f(t, state(t)) dt of the normalized shot, with
    /// an 8-point rule on every integration step.
    pub fn shot_integral(&self, r_end: f64, f: &dyn Fn(f64, &[f64; 4]) -> f64) -> f64 {
        let gl = gauss_legendre::<f64>(8);
        let mut edges = vec![0.0];
        edges.extend(self.knots.iter().copied().filter(|&k| k < r_end));
        edges.push(r_end.min(*self.knots.last().unwrap()));
        edges
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| gl.integrate(|t| f(t, &self.shot_state(t)), w[0], w[1]))
            .sum()
    }

    /// Trajectory nodes of the normalized shot and their states.
    pub fn shot_nodes(&self) -> impl Iterator<Item = (f64, &[f64; 4])> {
        self.knots.iter().copied().zip(self.states.iter())
    }

    /// The invariants of a computed solution: positivity and monotonicity
    /// at every node, the maximum at the center.
    pub fn is_positive_and_decreasing(&self) -> bool {
        let pos = self.u.iter().chain(&self.v).all(|&w| w > 0.0);
        let dec =
            self.u.windows(2).all(|w| w[1] <= w[0]) && self.v.windows(2).all(|w| w[1] <= w[0]);
        let slopes = self.du.iter().chain(&self.dv).all(|&d| d <= 0.0);
        pos && dec && slopes && self.u.first().is_some_and(|&u0| u0 <= self.sup_u)
    }
}

fn classify(sys: &RadialSystem, s: f64, rtol: f64) -> Result<(bool, f64)> {
    let (_, outcome) = sys.shoot(s, 1e12, rtol, ShotMode::Dirichlet)?;
    match outcome {
        Outcome::TooLarge(r) => Ok((true, r)),
        Outcome::TooSmall(r) => Ok((false, r)),
        Outcome::Undecided => Err(Error::NoConvergence {
            stage: format!("Dirichlet shot with V(0) = {s} never reached zero"),
            iterations: 1,
            residual: f64::NAN,
        }),
    }
}

/// Brackets the shooting threshold by geometric expansion about `s0`.
fn bracket(sys: &RadialSystem, s0: f64, rtol: f64) -> Result<(f64, f64)> {
    let (high, _) = classify(sys, s0, rtol)?;
    let mut last = s0;
    let mut step = 1e-3;
    while step <= 1e3 {
        let s = if high {
            s0 / (1.0 + step)
        } else {
            s0 * (1.0 + step)
        };
        if classify(sys, s, rtol)?.0 != high {
            return Ok(if high { (s, last) } else { (last, s) });
        }
        last = s;
        step *= 2.0;
    }
    Err(Error::NoConvergence {
        stage: format!("bracketing the shooting parameter about {s0}"),
        iterations: 20,
        residual: f64::NAN,
    })
}

/// Graded panel edges x_j = (j/M)^γ with γ ≥ 1 chosen so that at least
/// `core` nodes fall in x ≤ 10μ.
fn graded_edges(mu: f64, opts: &BvpOptions) -> Vec<f64> {
    let m = opts.panels as f64;
    let core_panels = (opts.core_nodes as f64 / opts.order as f64).ceil();
    let target = 10.0 * mu;
    let gamma = if target >= 1.0 {
        1.0
    } else {
        (target.ln() / (core_panels / m).ln()).max(1.0)
    };
    (0..=opts.panels)
        .map(|j| (j as f64 / m).powf(gamma))
        .collect()
}

/// Positive radial solution of the Dirichlet problem for `exp` (ε > 0).
pub fn solve_radial(exp: &ExponentPair, seed: Seed<'_>, opts: &BvpOptions) -> Result<BvpSolution> {
    if !(exp.eps > 0.0) {
        return Err(Error::Invalid(format!(
            "the Dirichlet problem needs eps > 0, got {}",
            exp.eps
        )));
    }
    let sys = RadialSystem::new(exp.n, exp.p, exp.q_eps);
    let s0 = match seed {
        Seed::Solution(prev) => prev.s,
        Seed::Bubble(profile) => profile.s,
        Seed::Cold => 1.0,
    };
    let (lo, hi) = bracket(&sys, s0, opts.rtol)?;
    let br = bisect_classifier(
        |s| classify(&sys, s, opts.rtol).map(|c| c.0),
        lo,
        hi,
        1e-16,
        200,
    )?;
    let s = br.hi;
    let (traj, outcome) = sys.shoot(s, 1e12, opts.rtol, ShotMode::Dirichlet)?;
    let r_star = match outcome {
        Outcome::TooLarge(r) => r,
        _ => {
            return Err(Error::NoConvergence {
                stage: "Dirichlet shot at the threshold".into(),
                iterations: br.iterations,
                residual: f64::NAN,
            })
        }
    };
    let knots: Vec<f64> = traj.nodes().to_vec();
    let states: Vec<[f64; 4]> = (0..knots.len())
        .map(|i| {
            let y = traj.state(i);
            [y[0], y[1], y[2], y[3]]
        })
        .collect();
    let end = states.last().unwrap();
    let boundary_mismatch = end[2].abs() / s;
    if !(boundary_mismatch <= opts.boundary_tol) {
        return Err(Error::NoConvergence {
            stage: "Dirichlet boundary match".into(),
            iterations: br.iterations,
            residual: boundary_mismatch,
        });
    }
    let lambda = r_star;
    let mu = 1.0 / lambda;
    let edges = graded_edges(mu, opts);
    let grid = Grid1D::from_panels(&edges, opts.order)?;
    let mut sol = BvpSolution {
        exp: *exp,
        grid,
        u: Vec::new(),
        v: Vec::new(),
        du: Vec::new(),
        dv: Vec::new(),
        sup_u: lambda.powf(exp.alpha_eps),
        lambda,
        mu,
        s,
        boundary_mismatch,
        residual: 0.0,
        knots,
        states,
    };
    let values: Vec<[f64; 4]> = sol.grid.nodes().iter().map(|&x| sol.state_at(x)).collect();
    sol.u = values.iter().map(|y| y[0]).collect();
    sol.du = values.iter().map(|y| y[1]).collect();
    sol.v = values.iter().map(|y| y[2]).collect();
    sol.dv = values.iter().map(|y| y[3]).collect();
    sol.residual = flux_residual(&sol, &edges);
    if !sol.is_positive_and_decreasing() {
        return Err(Error::NoConvergence {
            stage: "Dirichlet solution lost positivity".into(),
            iterations: br.iterations,
            residual: f64::NAN,
        });
    }
    Ok(sol)
}

/// max over panel edges x_j of |x_j^{N−1}u'(x_j) + ∫_0^{x_j} t^{N−1}v^p dt|
/// (and the v analogue), relative to max |x^{N−1}u'|, with the integrals
/// from the grid's own Gauss rule.
fn flux_residual(sol: &BvpSolution, edges: &[f64]) -> f64 {
    let n = sol.exp.nf();
    let (p, q) = (sol.exp.p, sol.exp.q_eps);
    let nodes = sol.grid.nodes();
    let w = sol.grid.weights();
    let order = nodes.len() / (edges.len() - 1);
    let (mut iu, mut iv) = (0.0, 0.0);
    let (mut worst_u, mut worst_v, mut scale_u, mut scale_v) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, x) in edges.iter().enumerate().skip(1) {
        for i in (k - 1) * order..k * order {
            let t = nodes[i].powf(n - 1.0);
            iu += w[i] * t * sol.v[i].powf(p);
            iv += w[i] * t * sol.u[i].powf(q);
        }
        let y = sol.state_at(*x);
        let fu = x.powf(n - 1.0) * y[1];
        let fv = x.powf(n - 1.0) * y[3];
        worst_u = worst_u.max((fu + iu).abs());
        worst_v = worst_v.max((fv + iv).abs());
        scale_u = scale_u.max(fu.abs());
        scale_v = scale_v.max(fv.abs());
    }
    (worst_u / scale_u).max(worst_v / scale_v)
}

/// Solves along a strictly decreasing ε schedule, each solve seeded by the
/// previous one.
pub fn continuation_sweep(
    exp: &ExponentPair,
    eps_schedule: &[f64],
    seed: Seed<'_>,
    opts: &BvpOptions,
) -> Result<Vec<BvpSolution>> {
    if eps_schedule.is_empty() || eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Invalid(
            "the ε schedule must be non-empty and strictly decreasing".into(),
        ));
    }
    let mut out: Vec<BvpSolution> = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let e = exp.with_eps(eps)?;
        let seed = match out.last() {
            Some(prev) => Seed::Solution(prev),
            None => seed,
        };
        let sol = solve_radial(&e, seed, opts).map_err(|err| match err {
            Error::NoConvergence {
                stage,
                iterations,
                residual,
            } => Error::NoConvergence {
                stage: format!("{stage} (eps = {eps:e})"),
                iterations,
                residual,
            },
            other => other,
        })?;
        out.push(sol);
    }
    Ok(out)
}

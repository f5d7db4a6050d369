//! The standard bubble: shooting on V(0) for the core, a Green-function
//! iteration for the far field, and fitted power laws beyond R_max.

use super::exponents::{ExponentPair, Regime};
use super::radial::{Outcome, RadialSystem, ShotMode, R_START};
use crate::error::{Error, Result};
use crate::numerics::{least_squares, logspace, richardson_extrapolate, Grid1D};
use serde::{Deserialize, Serialize};

/// Numerical settings of the ground-state solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateOptions {
    pub r_max: f64,
    /// Relative width of the final bracket on V(0).
    pub tol: f64,
    pub ode_rtol: f64,
    /// Logarithmic panels between `r_min` and `r_max`.
    pub panels: usize,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    pub r_min: f64,
    /// Relative disagreement of the two bracketing shots that ends the core.
    pub trust: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            r_max: 1e4,
            tol: 1e-14,
            ode_rtol: 1e-13,
            panels: 1000,
            order: 4,
            r_min: 1e-4,
            trust: 1e-9,
        }
    }
}

/// Far-field law used beyond the last grid node:
/// r^{N−2}V = b + c_v r^{−κ_v}, and for U
/// super: r^{N−2}U = a + c_u r^{−κ_u};
/// serrin: r^{N−2}U = a log r + c_u;
/// sub: r^{m}U = a + c_u r^{−κ_u}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub regime: Regime,
    pub n: f64,
    pub m: f64,
    pub a: f64,
    pub cu: f64,
    pub kappa_u: f64,
    pub b: f64,
    pub cv: f64,
    pub kappa_v: f64,
}

impl TailLaw {
    /// (U, U') at r.
    pub fn u(&self, r: f64) -> (f64, f64) {
        let d = 2.0 - self.n;
        match self.regime {
            Regime::Super => {
                let e2 = d - self.kappa_u;
                (
                    self.a * r.powf(d) + self.cu * r.powf(e2),
                    d * self.a * r.powf(d - 1.0) + e2 * self.cu * r.powf(e2 - 1.0),
                )
            }
            Regime::Serrin => {
                let w = self.a * r.ln() + self.cu;
                (w * r.powf(d), (d * w + self.a) * r.powf(d - 1.0))
            }
            Regime::Sub => {
                let e1 = -self.m;
                let e2 = -self.m - self.kappa_u;
                (
                    self.a * r.powf(e1) + self.cu * r.powf(e2),
                    e1 * self.a * r.powf(e1 - 1.0) + e2 * self.cu * r.powf(e2 - 1.0),
                )
            }
        }
    }

    /// (V, V') at r.
    pub fn v(&self, r: f64) -> (f64, f64) {
        let d = 2.0 - self.n;
        let e2 = d - self.kappa_v;
        (
            self.b * r.powf(d) + self.cv * r.powf(e2),
            d * self.b * r.powf(d - 1.0) + e2 * self.cv * r.powf(e2 - 1.0),
        )
    }
}

/// Decay constants with the fitted correction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub cu: f64,
    pub cv: f64,
    pub kappa_u: f64,
    pub kappa_v: f64,
    /// RMS misfit relative to the fitted constant.
    pub residual_u: f64,
    pub residual_v: f64,
}

/// The bubble (U, V) with U(0) = 1 on a logarithmic Gauss–Legendre grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub exp: ExponentPair,
    pub grid: Grid1D<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub regime: Regime,
    /// V(0).
    pub s: f64,
    pub s_bracket: [f64; 2],
    pub r_max: f64,
    /// Radius where the shot core hands over to the far-field solve.
    pub r_trust: f64,
    /// Relative mismatch of (U', V') across the hand-over.
    pub matching_jump: f64,
    pub tail: TailLaw,
    pub options: GroundStateOptions,
}

/// Ground state with default settings except `r_max` and the bracket tolerance.
pub fn solve_ground_state(exp: &ExponentPair, r_max: f64, tol: f64) -> Result<RadialProfile> {
    solve_ground_state_with(
        exp,
        &GroundStateOptions {
            r_max,
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_ground_state_with(
    exp: &ExponentPair,
    opts: &GroundStateOptions,
) -> Result<RadialProfile> {
    if exp.eps != 0.0 {
        return Err(Error::InvalidExponent("the bubble needs eps = 0".into()));
    }
    if !(opts.r_max >= 1e3) || !(opts.tol > 0.0) {
        return Err(Error::Invalid(
            "solve_ground_state needs r_max >= 1e3 and tol > 0".into(),
        ));
    }
    let sys = RadialSystem::new(exp.n, exp.p, exp.q0);
    let r_far = 1e12;
    let classify =
        |s: f64| -> Result<Outcome> { Ok(sys.shoot(s, r_far, opts.ode_rtol, ShotMode::Decay)?.1) };

    // bracket scan
    let scan = logspace(1e-4, 1e4, 41);
    let mut bracket = None;
    let mut prev: Option<(f64, Outcome)> = None;
    for &s in &scan {
        let o = classify(s)?;
        if let Outcome::Undecided = o {
            bracket = Some((s, s));
            break;
        }
        if let (Some((sp, Outcome::TooSmall(_))), Outcome::TooLarge(_)) = (prev, o) {
            bracket = Some((sp, s));
            break;
        }
        prev = Some((s, o));
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::BracketNotFound { lo: 1e-4, hi: 1e4 })?;

    let mut converged = lo == hi;
    for _ in 0..400 {
        if converged || hi - lo <= opts.tol * hi {
            converged = true;
            break;
        }
        let mid = if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            converged = true;
            break;
        }
        match classify(mid)? {
            Outcome::TooLarge(_) => hi = mid,
            Outcome::TooSmall(_) => lo = mid,
            Outcome::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            stage: "ground-state bisection".into(),
            iterations: 400,
            residual: (hi - lo) / hi,
        });
    }
    let s = 0.5 * (lo + hi);

    let (tr_lo, _) = sys.shoot(lo, opts.r_max, opts.ode_rtol, ShotMode::Decay)?;
    let (tr_hi, _) = sys.shoot(hi, opts.r_max, opts.ode_rtol, ShotMode::Decay)?;
    let grid = Grid1D::log_panels(opts.r_min, opts.r_max, opts.panels, opts.order)?;

    // the core ends where the two bracketing shots stop agreeing
    let t_end = tr_lo.t_end().min(tr_hi.t_end());
    let cap = (opts.r_max / 10.0).min(t_end);
    let mut r_trust = R_START;
    for &r in grid.nodes() {
        if r < R_START {
            continue;
        }
        if r > cap {
            break;
        }
        let (a, b): (Vec<f64>, Vec<f64>) = (tr_lo.eval(r), tr_hi.eval(r));
        let du = (a[0] - b[0]).abs() / (0.5 * (a[0] + b[0])).abs();
        let dv = (a[2] - b[2]).abs() / (0.5 * (a[2] + b[2])).abs();
        if !(du <= opts.trust && dv <= opts.trust) || a[0] <= 0.0 || a[2] <= 0.0 {
            break;
        }
        r_trust = r;
    }
    if r_trust < 10.0 {
        return Err(Error::NoConvergence {
            stage: "ground-state core".into(),
            iterations: 0,
            residual: r_trust,
        });
    }
    let core = |r: f64| -> [f64; 4] {
        let (a, b) = (tr_lo.eval(r), tr_hi.eval(r));
        [
            0.5 * (a[0] + b[0]),
            0.5 * (a[1] + b[1]),
            0.5 * (a[2] + b[2]),
            0.5 * (a[3] + b[3]),
        ]
    };
    let at_trust = core(r_trust);
    let far = solve_far_field(&sys, r_trust, at_trust[0], at_trust[2], opts.r_max)?;
    let far_start = far.state(0);
    let matching_jump = ((far_start[1] - at_trust[1]) / at_trust[1])
        .abs()
        .max(((far_start[3] - at_trust[3]) / at_trust[3]).abs());

    let n = grid.len();
    let (mut u, mut du, mut v, mut dv) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, &r) in grid.nodes().iter().enumerate() {
        let y = if r < R_START {
            sys.series(1.0, s, r)
        } else if r <= r_trust {
            core(r)
        } else {
            far.eval(&sys, r)
        };
        u[i] = y[0];
        du[i] = y[1];
        v[i] = y[2];
        dv[i] = y[3];
    }

    let placeholder = TailLaw {
        regime: exp.regime(),
        n: exp.nf(),
        m: exp.m(),
        a: 0.0,
        cu: 0.0,
        kappa_u: 0.0,
        b: 0.0,
        cv: 0.0,
        kappa_v: 0.0,
    };
    let mut profile = RadialProfile {
        exp: *exp,
        grid,
        u,
        v,
        du,
        dv,
        a: 0.0,
        b: 0.0,
        regime: exp.regime(),
        s,
        s_bracket: [lo, hi],
        r_max: opts.r_max,
        r_trust,
        matching_jump,
        tail: placeholder,
        options: *opts,
    };
    let fit = fit_decay_constants(&profile)?;
    profile.set_fit(&fit);
    Ok(profile)
}

/// Correction exponents of the far-field expansion.
pub fn tail_exponents(exp: &ExponentPair) -> (f64, f64) {
    let n = exp.nf();
    match exp.regime() {
        Regime::Super => (exp.kappa0(), (n - 2.0) * exp.q0 - n),
        Regime::Serrin => (0.0, (n - 2.0) * exp.q0 - n),
        Regime::Sub => (n - 2.0 - exp.m(), exp.m() * exp.q0 - n),
    }
}

/// Fits the decay constants over the last decade [R_max/10, R_max]:
/// b = lim r^{N−2}V and a by the regime law, each by extrapolation in 1/r with
/// the known correction exponent (and a log/constant fit at p = N/(N−2)).
pub fn fit_decay_constants(profile: &RadialProfile) -> Result<DecayFit> {
    let exp = &profile.exp;
    let n = exp.nf();
    let lo = profile.r_max / 10.0;
    let idx: Vec<usize> = (0..profile.grid.len())
        .filter(|&i| profile.grid.nodes()[i] >= lo)
        .collect();
    if idx.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: idx.len(),
        });
    }
    let (kappa_u, kappa_v) = tail_exponents(exp);
    let r: Vec<f64> = idx.iter().map(|&i| profile.grid.nodes()[i]).collect();

    // steps scaled by the window start keep the basis well conditioned
    let sv: Vec<(f64, f64)> = idx
        .iter()
        .zip(&r)
        .map(|(&i, &ri)| (lo / ri, ri.powf(n - 2.0) * profile.v[i]))
        .collect();
    let fv = richardson_extrapolate(&sv, kappa_v)?;

    let (a, cu, res_u) = match exp.regime() {
        Regime::Serrin => {
            let logs: Vec<f64> = r.iter().map(|x| x.ln()).collect();
            let ones = vec![1.0; r.len()];
            let y: Vec<f64> = idx
                .iter()
                .zip(&r)
                .map(|(&i, &ri)| ri.powf(n - 2.0) * profile.u[i])
                .collect();
            let f = least_squares(&[&logs, &ones], &y)?;
            (f.coefficients[0], f.coefficients[1], f.residual)
        }
        Regime::Super | Regime::Sub => {
            let pw = if exp.regime() == Regime::Super {
                n - 2.0
            } else {
                exp.m()
            };
            let su: Vec<(f64, f64)> = idx
                .iter()
                .zip(&r)
                .map(|(&i, &ri)| (lo / ri, ri.powf(pw) * profile.u[i]))
                .collect();
            let f = richardson_extrapolate(&su, kappa_u)?;
            (f.limit, f.coefficient * lo.powf(kappa_u), f.residual)
        }
    };
    let fit = DecayFit {
        a,
        b: fv.limit,
        cu,
        cv: fv.coefficient * lo.powf(kappa_v),
        kappa_u,
        kappa_v,
        residual_u: res_u / a.abs(),
        residual_v: fv.residual / fv.limit.abs(),
    };
    if !(fit.a > 0.0) || !(fit.residual_u <= 0.01) {
        return Err(Error::TailNotResolved {
            quantity: "U".into(),
            residual: fit.residual_u,
        });
    }
    if !(fit.b > 0.0) || !(fit.residual_v <= 0.01) {
        return Err(Error::TailNotResolved {
            quantity: "V".into(),
            residual: fit.residual_v,
        });
    }
    Ok(fit)
}

impl RadialProfile {
    pub(crate) fn set_fit(&mut self, fit: &DecayFit) {
        self.a = fit.a;
        self.b = fit.b;
        self.tail = TailLaw {
            regime: self.regime,
            n: self.exp.nf(),
            m: self.exp.m(),
            a: fit.a,
            cu: fit.cu,
            kappa_u: fit.kappa_u,
            b: fit.b,
            cv: fit.cv,
            kappa_v: fit.kappa_v,
        };
    }

    pub fn system(&self) -> RadialSystem {
        RadialSystem::new(self.exp.n, self.exp.p, self.exp.q0)
    }

    /// [U, U', V, V'] at radius r: series near the origin, quintic Hermite
    /// interpolation (second derivatives from the equations) between nodes,
    /// and the fitted far-field law beyond the last node.
    pub fn state_at(&self, r: f64) -> [f64; 4] {
        let r = r.abs();
        let nodes = self.grid.nodes();
        let last = nodes.len() - 1;
        if r <= nodes[0] {
            return self.system().series(1.0, self.s, r);
        }
        if r >= nodes[last] {
            let (u, du) = self.tail.u(r);
            let (v, dv) = self.tail.v(r);
            return [u, du, v, dv];
        }
        let j = nodes.partition_point(|&x| x <= r).clamp(1, last) - 1;
        let y0 = [self.u[j], self.du[j], self.v[j], self.dv[j]];
        let y1 = [self.u[j + 1], self.du[j + 1], self.v[j + 1], self.dv[j + 1]];
        self.system()
            .interpolate(nodes[j], &y0, nodes[j + 1], &y1, r)
    }

    /// Maximum relative imbalance of the radial flux identity
    /// r^{N−1}U'|_a^b = −∫_a^b V^p r^{N−1} (and the V analogue) over all grid
    /// panels, each integral with an 8-point rule on interpolated values.
    pub fn ode_residual(&self) -> f64 {
        let n = self.exp.nf();
        let gl = crate::numerics::gauss_legendre::<f64>(8);
        let o = self.options;
        let mut edges = vec![0.0];
        edges.extend(logspace(o.r_min, o.r_max, o.panels + 1));
        let mut worst: f64 = 0.0;
        for w in edges.windows(2) {
            let (a, b) = (w[0].max(R_START), w[1]);
            if b <= a {
                continue;
            }
            let (ya, yb) = (self.state_at(a), self.state_at(b));
            let mut iu = 0.0;
            let mut iv = 0.0;
            for (x, wt) in gl.mapped(a, b) {
                let y = self.state_at(x);
                let j = x.powf(n - 1.0);
                iu += wt * y[2].powf(self.exp.p) * j;
                iv += wt * y[0].powf(self.exp.q0) * j;
            }
            let (fa, fb) = (a.powf(n - 1.0), b.powf(n - 1.0));
            let ru =
                (fb * yb[1] - fa * ya[1] + iu).abs() / (fb * yb[1].abs() + fa * ya[1].abs() + iu);
            let rv =
                (fb * yb[3] - fa * ya[3] + iv).abs() / (fb * yb[3].abs() + fa * ya[3].abs() + iv);
            worst = worst.max(ru).max(rv);
        }
        worst
    }
}

/// Far field on [r_t, r_max] on a uniform grid in log r.
struct FarField {
    t0: f64,
    h: f64,
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl FarField {
    fn state(&self, j: usize) -> [f64; 4] {
        [self.u[j], self.du[j], self.v[j], self.dv[j]]
    }

    fn eval(&self, sys: &RadialSystem, r: f64) -> [f64; 4] {
        let m = self.r.len() - 1;
        let j = (((r.ln() - self.t0) / self.h).floor().max(0.0) as usize).min(m - 1);
        sys.interpolate(
            self.r[j],
            &self.state(j),
            self.r[j + 1],
            &self.state(j + 1),
            r,
        )
    }
}

/// Cumulative integral ∫_{t_0}^{t_j} f on a uniform grid, fourth order.
fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len() - 1;
    let mut c = vec![0.0; m + 1];
    for j in 0..m {
        let piece = if j == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if j == m - 1 {
            h / 24.0 * (f[m - 3] - 5.0 * f[m - 2] + 19.0 * f[m - 1] + 9.0 * f[m])
        } else {
            h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
        };
        c[j + 1] = c[j] + piece;
    }
    c
}

/// Decaying solution of −Δw = f on r > r_t with w(r_t) = w_t:
/// w = c r^{2−N} + (r^{2−N}∫_{r_t}^r f s^{N−1} + ∫_r^∞ f s)/(N−2).
fn green_tail(n: f64, r: &[f64], f: &[f64], h: f64, w_t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = r.len() - 1;
    let g1: Vec<f64> = f.iter().zip(r).map(|(fi, ri)| fi * ri.powf(n)).collect();
    let g2: Vec<f64> = f.iter().zip(r).map(|(fi, ri)| fi * ri * ri).collect();
    let i1 = cumulative(&g1, h);
    let c2 = cumulative(&g2, h);
    let gamma = -(f[m] / f[m - 1]).ln() / h;
    if !(gamma > 2.0) {
        return Err(Error::TailNotResolved {
            quantity: "far-field source".into(),
            residual: gamma,
        });
    }
    let rem = f[m] * r[m] * r[m] / (gamma - 2.0);
    let total = c2[m] + rem;
    let nm2 = n - 2.0;
    let c = r[0].powf(nm2) * (w_t - total / nm2);
    let mut w = vec![0.0; m + 1];
    let mut dw = vec![0.0; m + 1];
    for j in 0..=m {
        let i2 = total - c2[j];
        let rp = r[j].powf(-nm2);
        w[j] = c * rp + (rp * i1[j] + i2) / nm2;
        dw[j] = -nm2 * rp / r[j] * (c + i1[j] / nm2);
    }
    Ok((w, dw))
}

fn solve_far_field(
    sys: &RadialSystem,
    r_t: f64,
    u_t: f64,
    v_t: f64,
    r_max: f64,
) -> Result<FarField> {
    let n = sys.n;
    let span = (r_max / r_t).ln();
    let m = ((span / 1e-3).ceil() as usize).max(16);
    let h = span / m as f64;
    let t0 = r_t.ln();
    let r: Vec<f64> = (0..=m).map(|j| (t0 + h * j as f64).exp()).collect();
    let mut u: Vec<f64> = r.iter().map(|x| u_t * (r_t / x).powf(n - 2.0)).collect();
    let mut v: Vec<f64> = r.iter().map(|x| v_t * (r_t / x).powf(n - 2.0)).collect();
    let mut du = vec![0.0; m + 1];
    let mut dv = vec![0.0; m + 1];
    for it in 0..200 {
        let fu: Vec<f64> = u.iter().map(|x| x.max(0.0).powf(sys.q)).collect();
        let (vn, dvn) = green_tail(n, &r, &fu, h, v_t)?;
        let fv: Vec<f64> = vn.iter().map(|x| x.max(0.0).powf(sys.p)).collect();
        let (un, dun) = green_tail(n, &r, &fv, h, u_t)?;
        let change = u
            .iter()
            .zip(&un)
            .chain(v.iter().zip(&vn))
            .fold(0.0f64, |c, (a, b)| c.max(((a - b) / b).abs()));
        u = un;
        du = dun;
        v = vn;
        dv = dvn;
        if change < 1e-15 || (it > 50 && change < 1e-13) {
            return Ok(FarField {
                t0,
                h,
                r,
                u,
                du,
                v,
                dv,
            });
        }
    }
    Err(Error::NoConvergence {
        stage: "far-field iteration".into(),
        iterations: 200,
        residual: f64::NAN,
    })
}

//! Radial form of −ΔU = |V|^{p−1}V, −ΔV = |U|^{q−1}U and its shooting problem
//! U(0) = 1, V(0) = s. The odd extension keeps trajectories defined after a
//! component changes sign.

use crate::error::Result;
use crate::numerics::{integrate_ode_with, signed_pow, OdeOptions, Termination};
use crate::Trajectory;

/// Radius at which integration starts from the regular series.
pub const R_START: f64 = 1e-6;

/// Radial system in dimension `n`; state is [U, U', V, V'].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSystem {
    pub n: f64,
    pub p: f64,
    pub q: f64,
}

/// Which side of the shooting threshold a trajectory fell on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// s too small: V (or its decay flux) gives out first.
    TooSmall(f64),
    /// s too large: U gives out first.
    TooLarge(f64),
    /// Neither event before the end radius.
    Undecided,
}

/// What counts as "giving out".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMode {
    /// Entire-space decay: r^{N−2}·component stops increasing.
    Decay,
    /// Dirichlet problem: the component itself reaches zero.
    Dirichlet,
}

impl RadialSystem {
    pub fn new(n: usize, p: f64, q: f64) -> Self {
        Self { n: n as f64, p, q }
    }

    #[inline]
    pub fn rhs(&self, r: f64, y: &[f64], f: &mut [f64]) {
        let k = (self.n - 1.0) / r;
        f[0] = y[1];
        f[1] = -k * y[1] - signed_pow(y[2], self.p);
        f[2] = y[3];
        f[3] = -k * y[3] - signed_pow(y[0], self.q);
    }

    /// Second derivatives from the equations.
    #[inline]
    pub fn second_derivatives(&self, r: f64, u: f64, du: f64, v: f64, dv: f64) -> (f64, f64) {
        if r == 0.0 {
            // U''(0) = −V(0)^p / N
            return (
                -signed_pow(v, self.p) / self.n,
                -signed_pow(u, self.q) / self.n,
            );
        }
        let k = (self.n - 1.0) / r;
        (
            -k * du - signed_pow(v, self.p),
            -k * dv - signed_pow(u, self.q),
        )
    }

    /// Third derivatives from differentiating the equations once.
    #[inline]
    pub fn third_derivatives(&self, r: f64, u: f64, du: f64, v: f64, dv: f64) -> (f64, f64) {
        let (uu, vv) = self.second_derivatives(r, u, du, v, dv);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let k = (self.n - 1.0) / r;
        let fp = if v == 0.0 {
            0.0
        } else {
            self.p * v.abs().powf(self.p - 1.0) * dv
        };
        let fq = if u == 0.0 {
            0.0
        } else {
            self.q * u.abs().powf(self.q - 1.0) * du
        };
        (k / r * du - k * uu - fp, k / r * dv - k * vv - fq)
    }

    /// [U, U', V, V'] between two states at x0 < x1: values and slopes are
    /// each interpolated by quintic Hermite polynomials with the higher
    /// derivatives taken from the equations, so that U' does not suffer the
    /// cancellation of differentiating nearly constant values.
    pub fn interpolate(&self, x0: f64, y0: &[f64], x1: f64, y1: &[f64], r: f64) -> [f64; 4] {
        let (uu0, vv0) = self.second_derivatives(x0, y0[0], y0[1], y0[2], y0[3]);
        let (uu1, vv1) = self.second_derivatives(x1, y1[0], y1[1], y1[2], y1[3]);
        let (u3a, v3a) = self.third_derivatives(x0, y0[0], y0[1], y0[2], y0[3]);
        let (u3b, v3b) = self.third_derivatives(x1, y1[0], y1[1], y1[2], y1[3]);
        let (u, _) = quintic_hermite(x0, x1, [y0[0], y0[1], uu0], [y1[0], y1[1], uu1], r);
        let (v, _) = quintic_hermite(x0, x1, [y0[2], y0[3], vv0], [y1[2], y1[3], vv1], r);
        let (du, _) = quintic_hermite(x0, x1, [y0[1], uu0, u3a], [y1[1], uu1, u3b], r);
        let (dv, _) = quintic_hermite(x0, x1, [y0[3], vv0, v3a], [y1[3], vv1, v3b], r);
        [u, du, v, dv]
    }

    /// Regular expansion about the origin through r⁴.
    pub fn series(&self, u0: f64, v0: f64, r: f64) -> [f64; 4] {
        let n = self.n;
        let u2 = -v0.powf(self.p) / (2.0 * n);
        let v2 = -u0.powf(self.q) / (2.0 * n);
        let u4 = -self.p * v0.powf(self.p - 1.0) * v2 / (4.0 * (n + 2.0));
        let v4 = -self.q * u0.powf(self.q - 1.0) * u2 / (4.0 * (n + 2.0));
        let r2 = r * r;
        [
            u0 + u2 * r2 + u4 * r2 * r2,
            2.0 * u2 * r + 4.0 * u4 * r2 * r,
            v0 + v2 * r2 + v4 * r2 * r2,
            2.0 * v2 * r + 4.0 * v4 * r2 * r,
        ]
    }

    /// Integrates from the series start with U(0) = 1, V(0) = s until the
    /// first event of `mode` or `r_end`.
    pub fn shoot(
        &self,
        s: f64,
        r_end: f64,
        rtol: f64,
        mode: ShotMode,
    ) -> Result<(Trajectory, Outcome)> {
        let y0 = self.series(1.0, s, R_START);
        let opts = OdeOptions {
            rtol,
            atol: 1e-30,
            h_init: Some(R_START * 0.1),
            h_max: None,
            h_rel_max: Some(0.05),
            max_steps: 5_000_000,
        };
        let nm2 = self.n - 2.0;
        let (traj, term) = match mode {
            ShotMode::Decay => {
                let gu = move |r: f64, y: &[f64]| nm2 * y[0] + r * y[1];
                let gv = move |r: f64, y: &[f64]| nm2 * y[2] + r * y[3];
                integrate_ode_with(
                    |r, y, f| self.rhs(r, y, f),
                    R_START,
                    r_end,
                    &y0,
                    &opts,
                    &[&gu, &gv],
                )?
            }
            ShotMode::Dirichlet => {
                let gu = |_: f64, y: &[f64]| y[0];
                let gv = |_: f64, y: &[f64]| y[2];
                integrate_ode_with(
                    |r, y, f| self.rhs(r, y, f),
                    R_START,
                    r_end,
                    &y0,
                    &opts,
                    &[&gu, &gv],
                )?
            }
        };
        let outcome = match term {
            Termination::Event { index: 0, r } => Outcome::TooLarge(r),
            Termination::Event { r, .. } => Outcome::TooSmall(r),
            Termination::Completed => Outcome::Undecided,
        };
        Ok((traj, outcome))
    }
}

/// Quintic Hermite interpolant on [x0, x1] from (f, f', f'') at both ends;
/// returns the value and first derivative at x.
pub fn quintic_hermite(x0: f64, x1: f64, d0: [f64; 3], d1: [f64; 3], x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let g3 = -g0;
    let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let f = h0 * d0[0]
        + h * h1 * d0[1]
        + h * h * h2 * d0[2]
        + h3 * d1[0]
        + h * h4 * d1[1]
        + h * h * h5 * d1[2];
    let df = (g0 * d0[0]
        + h * g1 * d0[1]
        + h * h * g2 * d0[2]
        + g3 * d1[0]
        + h * g4 * d1[1]
        + h * h * g5 * d1[2])
        / h;
    (f, df)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_satisfies_equation_to_order() {
        let sys = RadialSystem::new(4, 2.0, 5.0);
        let r = 1e-3;
        let y = sys.series(1.0, 0.7, r);
        let mut f = [0.0; 4];
        sys.rhs(r, &y, &mut f);
        // U'' from the series vs the equation
        let h = 1e-6;
        let yp = sys.series(1.0, 0.7, r + h);
        let ym = sys.series(1.0, 0.7, r - h);
        assert!(((yp[1] - ym[1]) / (2.0 * h) - f[1]).abs() < 1e-6);
    }

    #[test]
    fn quintic_hermite_reproduces_quintics() {
        let f = |x: f64| {
            [
                1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5),
                1.0 - 6.0 * x * x + 2.5 * x.powi(4),
                -12.0 * x + 10.0 * x.powi(3),
            ]
        };
        let (a, b) = (0.3, 0.7);
        for x in [0.3, 0.41, 0.5, 0.66, 0.7] {
            let (v, d) = quintic_hermite(a, b, f(a), f(b), x);
            assert!((v - f(x)[0]).abs() < 1e-14);
            assert!((d - f(x)[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_shot_decays() {
        // p = q = 3 in N = 4 with s = 1 is the explicit bubble 1/(1 + r²/8)
        let sys = RadialSystem::new(4, 3.0, 3.0);
        let (tr, out) = sys.shoot(1.0, 50.0, 1e-12, ShotMode::Decay).unwrap();
        assert_eq!(out, Outcome::Undecided);
        let w = tr.eval(10.0);
        assert!((w[0] - 1.0 / (1.0 + 100.0 / 8.0)).abs() < 1e-9);
        assert!((w[0] - w[2]).abs() < 1e-12);
    }
}

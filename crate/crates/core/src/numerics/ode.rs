//! Dormand–Prince 5(4) with PI step control, quartic dense output and
//! zero-crossing events.

use super::Scalar;
use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// continuous extension: y(t + θh) = y + h Σ_i k_i Σ_j P[i][j] θ^{j+1}
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<T>,
    /// Largest allowed step (defaults to the interval length).
    pub h_max: Option<T>,
    /// Largest allowed step relative to |r|; keeps dense output accurate on
    /// radial problems whose solutions look polynomial near the origin.
    pub h_rel_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Scalar> OdeOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_init: None,
            h_max: None,
            h_rel_max: None,
            max_steps: 2_000_000,
        }
    }
}

impl<T: Scalar> Default for OdeOptions<T> {
    fn default() -> Self {
        Self::with_tol(T::lit(1e-10))
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<T> {
    Completed,
    /// Event function `index` crossed zero at `r`.
    Event {
        index: usize,
        r: T,
    },
}

/// Accepted steps plus the dense-output coefficients of each step.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    dim: usize,
    t: Vec<T>,
    y: Vec<T>,
    // four coefficient vectors per step
    q: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    fn new(t0: T, y0: &[T]) -> Self {
        Self {
            dim: y0.len(),
            t: vec![t0],
            y: y0.to_vec(),
            q: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.t
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.y[i * self.dim..(i + 1) * self.dim]
    }

    pub fn t_start(&self) -> T {
        self.t[0]
    }

    pub fn t_end(&self) -> T {
        *self.t.last().unwrap()
    }

    pub fn last_state(&self) -> &[T] {
        self.state(self.t.len() - 1)
    }

    fn step_index(&self, r: T) -> usize {
        let n = self.steps();
        if n == 0 {
            return 0;
        }
        // partition_point gives the first node > r
        let j = self.t.partition_point(|&x| x <= r);
        j.clamp(1, n) - 1
    }

    fn eval_in_step(&self, i: usize, theta: T, out: &mut [T]) {
        let d = self.dim;
        let y0 = self.state(i);
        let q = &self.q[i * 4 * d..(i + 1) * 4 * d];
        for c in 0..d {
            // Horner in θ
            let mut s = q[3 * d + c];
            s = s * theta + q[2 * d + c];
            s = s * theta + q[d + c];
            s = s * theta + q[c];
            out[c] = y0[c] + s * theta;
        }
    }

    /// Dense output at `r` (clamped to the integrated interval).
    pub fn eval_into(&self, r: T, out: &mut [T]) {
        if self.steps() == 0 {
            out.copy_from_slice(self.state(0));
            return;
        }
        let r = r.max(self.t_start()).min(self.t_end());
        let i = self.step_index(r);
        let h = self.t[i + 1] - self.t[i];
        let theta = if h > T::zero() {
            (r - self.t[i]) / h
        } else {
            T::zero()
        };
        self.eval_in_step(i, theta, out);
    }

    pub fn eval(&self, r: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_into(r, &mut out);
        out
    }

    fn push(&mut self, t: T, y: &[T], q: &[T]) {
        self.t.push(t);
        self.y.extend_from_slice(y);
        self.q.extend_from_slice(q);
    }

    /// Replaces the final step by its restriction to `[t_prev, t_new]`.
    fn truncate_last(&mut self, t_new: T) {
        let n = self.steps();
        let d = self.dim;
        let i = n - 1;
        let h = self.t[n] - self.t[i];
        let s = (t_new - self.t[i]) / h;
        let mut y = vec![T::zero(); d];
        self.eval_in_step(i, s, &mut y);
        // rescale the polynomial coefficients to the shorter step
        let q = &mut self.q[i * 4 * d..(i + 1) * 4 * d];
        let mut f = s;
        for j in 0..4 {
            for c in 0..d {
                q[j * d + c] = q[j * d + c] * f;
            }
            f = f * s;
        }
        self.t[n] = t_new;
        self.y[n * d..(n + 1) * d].copy_from_slice(&y);
    }
}

/// Integrates `y' = rhs(r, y)` from `r0` to `r1` with relative and absolute
/// tolerance `tol`.
pub fn integrate_ode<T, F>(rhs: F, r0: T, r1: T, y0: &[T], tol: T) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let (traj, _) = integrate_ode_with(rhs, r0, r1, y0, &OdeOptions::with_tol(tol), &[])?;
    Ok(traj)
}

/// General driver. Integration stops at the first zero crossing of any of the
/// `events`; the crossing is located on the dense output and the trajectory is
/// truncated there.
pub fn integrate_ode_with<T, F>(
    mut rhs: F,
    r0: T,
    r1: T,
    y0: &[T],
    opts: &OdeOptions<T>,
    events: &[&dyn Fn(T, &[T]) -> T],
) -> Result<(Trajectory<T>, Termination<T>)>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    if !(r1 > r0) || !(tol_ok(opts.rtol) && opts.atol >= T::zero()) {
        return Err(Error::Domain(format!(
            "integrate_ode needs r1 > r0 and positive tolerances (r0 = {}, r1 = {})",
            r0, r1
        )));
    }
    let d = y0.len();
    let mut traj = Trajectory::new(r0, y0);
    let mut k: Vec<Vec<T>> = vec![vec![T::zero(); d]; 7];
    let mut ytmp = vec![T::zero(); d];
    let mut ynew = vec![T::zero(); d];
    let mut q = vec![T::zero(); 4 * d];
    let mut y = y0.to_vec();
    let mut t = r0;
    let span = r1 - r0;
    let h_max = opts.h_max.unwrap_or(span);

    rhs(t, &y, &mut k[0]);
    let mut h = match opts.h_init {
        Some(h) => h,
        None => initial_step(&mut rhs, t, &y, &k[0], opts),
    }
    .min(h_max)
    .min(span);

    let mut g_prev: Vec<T> = events.iter().map(|g| g(t, &y)).collect();
    let mut err_prev = T::lit(1e-4);
    let mut rejected = false;
    let safety = T::lit(0.9);
    let (alpha, beta) = (T::lit(0.17), T::lit(0.04));

    let cap = |t: T, h: T| match opts.h_rel_max {
        Some(f) => h
            .min(f * t.abs())
            .max(T::epsilon() * T::lit(64.0) * t.abs()),
        None => h,
    };
    h = cap(t, h);
    for _ in 0..opts.max_steps {
        h = cap(t, h);
        if t + h > r1 || (r1 - (t + h)) < T::lit(1e-12) * span {
            h = r1 - t;
        }
        if h <= T::epsilon() * t.abs().max(T::one()) * T::lit(4.0) || !h.is_finite() {
            return Err(Error::StepFailure {
                r: t.as_f64(),
                h: h.as_f64(),
            });
        }
        for s in 1..7 {
            for c in 0..d {
                let mut acc = y[c];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc + h * T::lit(a) * kj[c];
                    }
                }
                ytmp[c] = acc;
            }
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
            rhs(t + T::lit(C[s]) * h, &ytmp, &mut k[s]);
        }
        // error estimate
        let mut err = T::zero();
        let mut finite = true;
        for c in 0..d {
            let mut e = T::zero();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e = e + T::lit(E[j]) * kj[c];
                }
            }
            e = e * h;
            let sc = opts.atol + opts.rtol * y[c].abs().max(ynew[c].abs());
            let r = e / sc;
            if !r.is_finite() || !ynew[c].is_finite() {
                finite = false;
            }
            err = err + r * r;
        }
        err = (err / T::from_usize(d).unwrap()).sqrt();
        if !finite {
            h = h * T::lit(0.25);
            rejected = true;
            continue;
        }
        if err <= T::one() {
            // accepted: build dense coefficients
            for j in 0..4 {
                for c in 0..d {
                    let mut acc = T::zero();
                    for (i, ki) in k.iter().enumerate() {
                        let p = P[i][j];
                        if p != 0.0 {
                            acc = acc + T::lit(p) * ki[c];
                        }
                    }
                    q[j * d + c] = acc * h;
                }
            }
            let t_new = if h == r1 - t { r1 } else { t + h };
            traj.push(t_new, &ynew, &q);

            if !events.is_empty() {
                let g_new: Vec<T> = events.iter().map(|g| g(t_new, &ynew)).collect();
                let mut first: Option<(usize, T)> = None;
                for (i, (&a, &b)) in g_prev.iter().zip(&g_new).enumerate() {
                    if crosses(a, b) {
                        let tr = locate_crossing(&traj, events[i], t, t_new, a);
                        if first.is_none_or(|(_, tf)| tr < tf) {
                            first = Some((i, tr));
                        }
                    }
                }
                if let Some((index, tr)) = first {
                    traj.truncate_last(tr);
                    return Ok((traj, Termination::Event { index, r: tr }));
                }
                g_prev = g_new;
            }

            t = t_new;
            y.copy_from_slice(&ynew);
            // FSAL
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            if t >= r1 {
                return Ok((traj, Termination::Completed));
            }
            let err_c = err.max(T::lit(1e-10));
            let mut fac = safety * err_c.powf(-alpha) * err_prev.powf(beta);
            fac = fac.max(T::lit(0.2)).min(T::lit(10.0));
            if rejected {
                fac = fac.min(T::one());
            }
            h = (h * fac).min(h_max);
            err_prev = err_c;
            rejected = false;
        } else {
            let fac = (safety * err.powf(-alpha)).max(T::lit(0.2));
            h = h * fac;
            rejected = true;
        }
    }
    Err(Error::StepFailure {
        r: t.as_f64(),
        h: h.as_f64(),
    })
}

fn tol_ok<T: Scalar>(x: T) -> bool {
    x > T::zero() && x.is_finite()
}

fn crosses<T: Scalar>(a: T, b: T) -> bool {
    (a > T::zero() && b <= T::zero()) || (a < T::zero() && b >= T::zero())
}

fn locate_crossing<T: Scalar>(
    traj: &Trajectory<T>,
    g: &dyn Fn(T, &[T]) -> T,
    t0: T,
    t1: T,
    g0: T,
) -> T {
    let mut buf = vec![T::zero(); traj.dim()];
    let (mut lo, mut hi) = (t0, t1);
    let s0 = g0 > T::zero();
    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        traj.eval_into(mid, &mut buf);
        if (g(mid, &buf) > T::zero()) == s0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn initial_step<T, F>(rhs: &mut F, t: T, y: &[T], f0: &[T], opts: &OdeOptions<T>) -> T
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    let d = y.len();
    let n = T::from_usize(d).unwrap();
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for c in 0..d {
        let sc = opts.atol + opts.rtol * y[c].abs();
        d0 = d0 + (y[c] / sc).powi(2);
        d1 = d1 + (f0[c] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let y1: Vec<T> = (0..d).map(|c| y[c] + h0 * f0[c]).collect();
    let mut f1 = vec![T::zero(); d];
    rhs(t + h0, &y1, &mut f1);
    let mut d2 = T::zero();
    for c in 0..d {
        let sc = opts.atol + opts.rtol * y[c].abs();
        d2 = d2 + ((f1[c] - f0[c]) / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0)).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential() {
        let tr = integrate_ode(
            |_, y: &[f64], f: &mut [f64]| f[0] = y[0],
            0.0,
            1.0,
            &[1.0],
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(tr.last_state()[0], std::f64::consts::E, epsilon = 1e-10);
    }

    #[test]
    fn cosine() {
        let tr = integrate_ode(
            |_, y: &[f64], f: &mut [f64]| {
                f[0] = y[1];
                f[1] = -y[0];
            },
            0.0,
            std::f64::consts::PI,
            &[1.0, 0.0],
            1e-12,
        )
        .unwrap();
        assert!((tr.last_state()[0] + 1.0).abs() < 1e-10);
        // dense output in the middle
        let mid = tr.eval(1.0);
        assert!((mid[0] - 1f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn radial_harmonic_power_law() {
        let n = 4.0;
        let tr = integrate_ode(
            |r, y: &[f64], f: &mut [f64]| {
                f[0] = y[1];
                f[1] = -(n - 1.0) / r * y[1];
            },
            1.0,
            2.0,
            &[1.0, -2.0],
            1e-12,
        )
        .unwrap();
        assert!((tr.last_state()[0] - 0.25).abs() < 1e-10);
        assert!((tr.eval(1.5)[0] - 1.0 / 2.25).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_nodes() {
        let tr = integrate_ode(
            |r, y: &[f64], f: &mut [f64]| {
                f[0] = y[1];
                f[1] = -y[0] * (1.0 + r);
            },
            0.0,
            5.0,
            &[1.0, 0.3],
            1e-9,
        )
        .unwrap();
        for i in 0..tr.nodes().len() {
            let r = tr.nodes()[i];
            let e = tr.eval(r);
            for c in 0..2 {
                assert!(
                    (e[c] - tr.state(i)[c]).abs()
                        <= 4.0 * f64::EPSILON * tr.state(i)[c].abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn event_is_located() {
        // y = cos r first crosses zero at π/2
        let g = |_: f64, y: &[f64]| y[0];
        let (tr, term) = integrate_ode_with(
            |_, y: &[f64], f: &mut [f64]| {
                f[0] = y[1];
                f[1] = -y[0];
            },
            0.0,
            10.0,
            &[1.0, 0.0],
            &OdeOptions::with_tol(1e-12),
            &[&g],
        )
        .unwrap();
        match term {
            Termination::Event { index, r } => {
                assert_eq!(index, 0);
                assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
                assert_eq!(tr.t_end(), r);
                assert!(tr.last_state()[0].abs() < 1e-9);
            }
            _ => panic!("event missed"),
        }
    }

    #[test]
    fn works_in_f32() {
        let tr = integrate_ode(
            |_, y: &[f32], f: &mut [f32]| f[0] = -y[0],
            0.0f32,
            1.0,
            &[1.0],
            1e-5,
        )
        .unwrap();
        assert!((tr.last_state()[0] - (-1.0f32).exp()).abs() < 1e-4);
    }

    #[test]
    fn bad_interval() {
        assert!(matches!(
            integrate_ode(|_, _: &[f64], _: &mut [f64]| {}, 1.0, 0.5, &[0.0], 1e-8),
            Err(Error::Domain(_))
        ));
    }
}

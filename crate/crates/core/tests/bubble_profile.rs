use approx::assert_relative_eq;
use lane_emden::bubble::*;
use lane_emden::numerics::{integrate_ode, sphere_area};
use proptest::prelude::*;
use std::sync::OnceLock;

fn profile(n: usize, p: f64) -> RadialProfile {
    let e = make_exponents(n, p, 0.0).unwrap();
    solve_ground_state(&e, 1e4, 1e-14).unwrap()
}

fn serrin_n4() -> &'static RadialProfile {
    static P: OnceLock<RadialProfile> = OnceLock::new();
    P.get_or_init(|| profile(4, 2.0))
}

fn super_n4() -> &'static RadialProfile {
    static P: OnceLock<RadialProfile> = OnceLock::new();
    P.get_or_init(|| profile(4, 2.5))
}

/// Least-squares slope of log f against log r over the nodes in the last decade.
fn last_decade_slope(pr: &RadialProfile, f: impl Fn(usize) -> f64) -> f64 {
    let nodes = pr.grid.nodes();
    let pts: Vec<(f64, f64)> = (0..nodes.len())
        .filter(|&i| nodes[i] >= pr.r_max / 10.0)
        .map(|i| (nodes[i].ln(), f(i).ln()))
        .collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn symmetric_point_matches_scalar_ground_state() {
    let pr = profile(4, 3.0);
    // independent scalar shot of w'' + (3/r) w' + w³ = 0, w(0) = 1
    let r0 = 1e-6;
    let w0 = [1.0 - r0 * r0 / 8.0, -r0 / 4.0];
    let traj = integrate_ode(
        |r, y: &[f64], f: &mut [f64]| {
            f[0] = y[1];
            f[1] = -3.0 / r * y[1] - y[0].powi(3);
        },
        r0,
        2e3,
        &w0,
        1e-13,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (i, &r) in pr.grid.nodes().iter().enumerate() {
        let w = if r < r0 {
            1.0
        } else if r <= 2e3 {
            traj.eval(r)[0]
        } else {
            1.0 / (1.0 + r * r / 8.0)
        };
        worst = worst
            .max((pr.u[i] - w).abs())
            .max((pr.v[i] - w).abs())
            .max((pr.u[i] - pr.v[i]).abs());
        assert!((pr.u[i] - 1.0 / (1.0 + r * r / 8.0)).abs() < 1e-8);
    }
    assert!(worst <= 1e-6, "sup |U − w| = {worst}");
    assert_relative_eq!(pr.s, 1.0, max_relative = 1e-12);
}

#[test]
fn serrin_profile_is_positive_monotone_and_solves_the_system() {
    let pr = serrin_n4();
    assert_eq!(pr.regime, Regime::Serrin);
    for i in 0..pr.grid.len() {
        assert!(pr.u[i] > 0.0 && pr.v[i] > 0.0);
        assert!(pr.du[i] < 0.0 && pr.dv[i] < 0.0);
        if i > 0 {
            assert!(pr.u[i] < pr.u[i - 1] && pr.v[i] < pr.v[i - 1]);
        }
    }
    assert!(pr.ode_residual() <= 1e-7);
    assert_relative_eq!(pr.state_at(0.0)[0], 1.0, epsilon = 1e-15);
}

#[test]
fn flux_residual_is_small_in_every_regime() {
    for (n, p) in [(4, 1.5), (5, 1.8), (5, 1.3)] {
        assert!(profile(n, p).ode_residual() <= 1e-7);
    }
}

#[test]
fn v_decays_like_the_fundamental_solution() {
    let pr = profile(5, 1.8);
    let slope = last_decade_slope(&pr, |i| pr.v[i]);
    assert!((-3.03..=-2.97).contains(&slope), "slope {slope}");
}

#[test]
fn u_tail_exponent_follows_the_regime_law() {
    let sup = super_n4();
    let s = last_decade_slope(sup, |i| sup.u[i]);
    assert_relative_eq!(s, -2.0, max_relative = 0.01);

    let ser = serrin_n4();
    let nodes = ser.grid.nodes();
    let s = last_decade_slope(ser, |i| ser.u[i] / nodes[i].ln());
    assert_relative_eq!(s, -2.0, max_relative = 0.01);

    let sub = profile(4, 1.5);
    let s = last_decade_slope(&sub, |i| sub.u[i]);
    assert_relative_eq!(s, -sub.exp.m(), max_relative = 0.01);
}

#[test]
fn decay_constants_satisfy_the_regime_identities() {
    for (n, p) in [(4usize, 1.5), (5, 1.3)] {
        let pr = profile(n, p);
        let nf = n as f64;
        let rhs = pr.a * ((nf - 2.0) * p - 2.0) * (nf - (nf - 2.0) * p);
        assert_relative_eq!(pr.b.powf(p), rhs, max_relative = 0.01);
    }
    let ser = serrin_n4();
    assert_relative_eq!(ser.b.powf(2.0), 2.0 * ser.a, max_relative = 0.01);
    let sup = super_n4();
    let c = compute_constants(sup).unwrap();
    assert_relative_eq!(sup.a * c.a1, sup.b * c.a2.unwrap(), max_relative = 0.01);
}

#[test]
fn decay_fit_is_reproducible_from_the_profile() {
    let pr = super_n4();
    let fit = fit_decay_constants(pr).unwrap();
    assert_eq!(fit.a, pr.a);
    assert_eq!(fit.b, pr.b);
    assert!(fit.residual_u < 1e-6 && fit.residual_v < 1e-6);
}

#[test]
fn symmetric_bubble_has_closed_form_constants() {
    // U = (1 + r²/8)^{−1} in N = 4: ∫U^{q₀+1} = 2π² ∫ r³ (1 + r²/8)^{−4} dr = 2π²·32/6
    let pr = profile(4, 3.0);
    let c = compute_constants(&pr).unwrap();
    let j = 2.0 * std::f64::consts::PI.powi(2) * 32.0 / 6.0;
    assert_relative_eq!(c.j_u, j, max_relative = 1e-9);
    assert_relative_eq!(c.a, 8.0, max_relative = 1e-9);
    assert_relative_eq!(c.b, 8.0, max_relative = 1e-9);
}

#[test]
fn constants_satisfy_their_identities() {
    for pr in [serrin_n4(), super_n4()] {
        let c = compute_constants(pr).unwrap();
        assert!(c.a1 > 0.0 && c.a3 > 0.0 && c.s > 0.0);
        assert_relative_eq!(c.s, c.s_alt, max_relative = 0.005);
        assert_relative_eq!(c.a3, c.a3_closed, max_relative = 0.005);
        assert!(c.psi0_moment.abs() <= 0.005 * c.a1);
        assert_relative_eq!(c.a1_alt, c.a1, max_relative = 0.01);
        assert!(c.pohozaev_boundary <= 1e-4);
    }
    let ser = compute_constants(serrin_n4()).unwrap();
    assert!(ser.a2.is_none());
    assert!(matches!(
        ser.a2(),
        Err(lane_emden::Error::DivergentIntegral(_))
    ));
    let sup = compute_constants(super_n4()).unwrap();
    assert!(sup.a2.unwrap() > 0.0);
    assert_eq!(sup.kappa0, Some(1.0));
}

#[test]
fn halving_the_tolerance_barely_moves_the_constants() {
    let e = make_exponents(4, 2.0, 0.0).unwrap();
    let a = solve_ground_state(&e, 1e4, 1e-12).unwrap();
    let b = solve_ground_state(&e, 1e4, 0.5e-12).unwrap();
    let (ca, cb) = (
        compute_constants(&a).unwrap(),
        compute_constants(&b).unwrap(),
    );
    for (x, y) in [
        (a.a, b.a),
        (a.b, b.b),
        (ca.a1, cb.a1),
        (ca.a3, cb.a3),
        (ca.s, cb.s),
    ] {
        assert_relative_eq!(x, y, max_relative = 0.002);
    }
}

#[test]
fn bubble_normalization_and_scaling() {
    let pr = super_n4();
    let o = [0.0; 4];
    let (u, v) = eval_bubble(pr, 1.0, &o, &o);
    assert_eq!(u, 1.0);
    assert_relative_eq!(v, pr.s, max_relative = 1e-15);
    let al = pr.exp.alpha0();
    for mu in [0.1, 0.7, 3.0] {
        for y in [
            [0.3, 0.0, 0.0, 0.0],
            [1.0, 2.0, -1.0, 0.5],
            [40.0, 0.0, 3.0, 0.0],
        ] {
            let x: Vec<f64> = y.iter().map(|c| mu * c).collect();
            let (um, _) = eval_bubble(pr, mu, &o, &x);
            let (u1, _) = eval_bubble(pr, 1.0, &o, &y);
            assert_relative_eq!(um * mu.powf(al), u1, max_relative = 1e-13);
        }
    }
}

#[test]
fn scaled_energy_is_independent_of_mu() {
    let pr = super_n4();
    let q0 = pr.exp.q0;
    let area: f64 = sphere_area(4);
    let energy = |mu: f64| {
        // ∫ U_{μ,0}^{q₀+1} over the grid scaled by μ (the tail beyond is below 1e−12)
        let nodes = pr.grid.nodes();
        let w = pr.grid.weights();
        let o = [0.0; 4];
        let mut s = 0.0;
        for i in 0..nodes.len() {
            let r = mu * nodes[i];
            let (u, _) = eval_bubble(pr, mu, &o, &[r, 0.0, 0.0, 0.0]);
            s += mu * w[i] * u.powf(q0 + 1.0) * r.powi(3);
        }
        area * s
    };
    let e1 = energy(1.0);
    for mu in [0.01, 0.5, 20.0] {
        assert_relative_eq!(energy(mu), e1, max_relative = 1e-10);
    }
}

#[test]
fn kernel_values_at_special_points() {
    let pr = super_n4();
    let o = [0.0; 4];
    let (psi, phi) = eval_kernels(pr, 1.0, &o, 1, &[0.0, 0.7, 0.0, 0.0]);
    assert_eq!(psi, 0.0);
    assert_eq!(phi, 0.0);
    let (psi0, _) = eval_kernels(pr, 1.0, &o, 0, &o);
    assert_relative_eq!(psi0, 4.0 / (pr.exp.q0 + 1.0), max_relative = 1e-15);
}

fn fd_laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let mut s = 0.0;
    let f0 = f(x);
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        s += (f(&xp) - 2.0 * f0 + f(&xm)) / (h * h);
    }
    s
}

#[test]
fn kernels_solve_the_linearized_system() {
    for pr in [super_n4(), serrin_n4()] {
        let (p, q0) = (pr.exp.p, pr.exp.q0);
        let xi = [0.1, -0.2, 0.0, 0.3];
        let mu = 0.8;
        for l in 0..=4 {
            for x in [
                [0.5, 0.2, 0.1, 0.0],
                [1.3, -0.4, 0.9, 0.2],
                [0.0, 3.0, 1.0, -2.0],
            ] {
                let psi = |y: &[f64]| eval_kernels(pr, mu, &xi, l, y).0;
                let phi = |y: &[f64]| eval_kernels(pr, mu, &xi, l, y).1;
                let (_, v) = eval_bubble(pr, mu, &xi, &x);
                let (u, _) = eval_bubble(pr, mu, &xi, &x);
                let (ps, ph) = eval_kernels(pr, mu, &xi, l, &x);
                let r1 = fd_laplacian(&psi, &x, 1e-3) + p * v.powf(p - 1.0) * ph;
                let r2 = fd_laplacian(&phi, &x, 1e-3) + q0 * u.powf(q0 - 1.0) * ps;
                assert!(
                    r1.abs() <= 1e-5 && r2.abs() <= 1e-5,
                    "l={l} x={x:?}: {r1:e} {r2:e}"
                );
            }
        }
    }
}

#[test]
fn profile_round_trips_through_csv_and_json() {
    let pr = super_n4();
    let dir = tempdir();
    pr.save(&dir, "bubble").unwrap();
    let back = RadialProfile::load(&dir, "bubble").unwrap();
    for i in 0..pr.grid.len() {
        for (a, b) in [
            (pr.u[i], back.u[i]),
            (pr.v[i], back.v[i]),
            (pr.du[i], back.du[i]),
            (pr.dv[i], back.dv[i]),
        ] {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }
    assert_eq!(back.a, pr.a);
    assert_eq!(back.tail, pr.tail);
    let bad = pr.to_csv().replacen("r,U", "x,U", 1);
    assert!(RadialProfile::from_parts(&pr.header(), &bad).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!(
        "le-bubble-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn rejects_shifted_exponents_and_short_domains() {
    let e = make_exponents(4, 2.0, 0.1).unwrap();
    assert!(solve_ground_state(&e, 1e4, 1e-12).is_err());
    let e = make_exponents(4, 2.0, 0.0).unwrap();
    assert!(solve_ground_state(&e, 100.0, 1e-12).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_algebra(n in 3usize..8, t in 0.01f64..0.99, eps in 0.0f64..0.05) {
        let nf = n as f64;
        let p = 2.0 / (nf - 2.0) + t * nf / (nf - 2.0);
        let e = make_exponents(n, p, eps).unwrap();
        prop_assert!(e.hyperbola_residual().abs() <= 1e-14);
        let e0 = e.with_eps(0.0).unwrap();
        prop_assert_eq!(e0.q_eps, e0.q0);
        prop_assert!(e0.hyperbola_residual().abs() <= 1e-14);
        let pq = p * e.q_eps - 1.0;
        prop_assert!((e.alpha_eps - 2.0 * (p + 1.0) / pq).abs() <= 1e-12 * e.alpha_eps);
        prop_assert!((e.beta_eps - 2.0 * (e.q_eps + 1.0) / pq).abs() <= 1e-12 * e.beta_eps);
        prop_assert!((e.q0 - e.q_eps - e.q_gap()).abs() <= 1e-9 * e.q0);
        prop_assert!((e0.alpha0() - e0.alpha_eps).abs() <= 1e-12 * e0.alpha0());
    }

    #[test]
    fn bubble_scaling_is_exact(mu in 0.01f64..100.0, y0 in -50.0f64..50.0, y1 in -50.0f64..50.0) {
        let pr = super_n4();
        let o = [0.0; 4];
        let y = [y0, y1, 0.0, 0.0];
        let x: Vec<f64> = y.iter().map(|c| mu * c).collect();
        let (um, vm) = eval_bubble(pr, mu, &o, &x);
        let (u1, v1) = eval_bubble(pr, 1.0, &o, &y);
        prop_assert!((um * mu.powf(pr.exp.alpha0()) - u1).abs() <= 1e-12 * u1);
        prop_assert!((vm * mu.powf(pr.exp.beta0()) - v1).abs() <= 1e-12 * v1);
    }

    #[test]
    fn interpolated_profile_is_decreasing(r in 1e-5f64..1e5, f in 1.0001f64..1.5) {
        let pr = serrin_n4();
        let (a, b) = (pr.state_at(r), pr.state_at(r * f));
        prop_assert!(b[0] < a[0] && b[2] < a[2]);
        prop_assert!(a[1] < 0.0 && a[3] < 0.0);
    }
}

use approx::assert_relative_eq;
use lane_emden::bubble::{make_exponents, solve_ground_state_with, GroundStateOptions, Regime};
use lane_emden::greens::{wth_theta_center_series, Configuration};
use lane_emden::numerics::{bisect, logspace, sphere_area};
use lane_emden::reduced_energy::{ReducedEnergy, ReducedReport};
use lane_emden::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn energy(n: usize, p: f64) -> ReducedEnergy {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), ReducedEnergy>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, p.to_bits());
    if let Some(re) = cache.lock().unwrap().get(&key) {
        return re.clone();
    }
    let exp = make_exponents(n, p, 0.0).unwrap();
    let profile = solve_ground_state_with(&exp, &GroundStateOptions::default()).unwrap();
    let re = ReducedEnergy::from_profile(&profile).unwrap();
    cache.lock().unwrap().insert(key, re.clone());
    re
}

fn point(n: usize, head: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[..head.len()].copy_from_slice(head);
    x
}

/// Random configuration in Λ_ρ̃ with |x| ≤ 0.7 and d̃ ∈ [0.1, 2].
fn random_config(re: &ReducedEnergy, k: usize, rng: &mut ChaCha8Rng) -> Configuration {
    let n = re.n();
    loop {
        let deltas = (0..k).map(|_| rng.random_range(0.1..2.0)).collect();
        let points = (0..k)
            .map(|_| {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.4..0.4)).collect();
                x
            })
            .collect();
        let c = Configuration { deltas, points };
        if re.admissible(&c)
            && c.points
                .iter()
                .all(|x| x.iter().map(|v| v * v).sum::<f64>() < 0.49)
        {
            return c;
        }
    }
}

#[test]
fn c0_follows_the_regime() {
    for (n, p) in [(4, 2.5), (4, 2.0), (4, 1.5), (5, 2.0), (5, 1.6)] {
        let re = energy(n, p);
        let c = &re.constants;
        let sp = c.s.powf(p * (c.q0 + 1.0) / (p * c.q0 - 1.0));
        let expected = match re.regime {
            Regime::Super => sp / (c.a1 * c.a2.unwrap()),
            Regime::Serrin => sp / (sphere_area::<f64>(n) * c.b.powf(p) * c.a1),
            Regime::Sub => (p + 1.0) * c.a1.powf(-(p + 1.0)) * sp,
        };
        assert!(re.c0 > 0.0);
        assert_relative_eq!(re.c0, expected, max_relative = 1e-14);
    }
}

#[test]
fn missing_a2_is_reported() {
    let re = energy(4, 2.5);
    let mut constants = re.constants;
    constants.a2 = None;
    let err = ReducedEnergy::new(constants, re.bundle.clone()).unwrap_err();
    assert!(matches!(err, Error::MissingConstant(_)), "{err:?}");
}

#[test]
fn single_bubble_energy_is_the_closed_formula() {
    let re = energy(4, 2.5);
    let x = point(4, &[0.2, -0.1]);
    for d in [0.1, 0.5, 2.0] {
        let u = re.upsilon(&Configuration::single(d, x.clone())).unwrap();
        let tau = re.bundle.robin(&x).unwrap();
        assert_relative_eq!(u, d * d * tau - re.c0 * d.ln(), max_relative = 1e-14);
    }
}

#[test]
fn single_bubble_stationary_point() {
    for (n, p) in [(4, 2.5), (4, 2.0), (5, 2.0)] {
        let re = energy(n, p);
        let ds = re.single_bubble_d_star().unwrap();
        let nf = n as f64;
        assert_relative_eq!(
            ds,
            (re.c0 / ((nf - 2.0) * re.bundle.gamma_n)).powf(1.0 / (nf - 2.0)),
            max_relative = 1e-14
        );
        let g = re
            .grad_upsilon(&Configuration::single(ds, vec![0.0; n]))
            .unwrap();
        let scale = re.c0 / ds;
        assert!(g.iter().all(|v| v.abs() <= 1e-8 * scale), "{g:?}");
        // x-gradient at the center vanishes for any d
        for d in [0.2, 1.0, 3.0] {
            let g = re
                .grad_upsilon(&Configuration::single(d, vec![0.0; n]))
                .unwrap();
            assert!(g[1..].iter().all(|v| v.abs() <= 1e-10), "{g:?}");
        }
    }
}

#[test]
fn newton_recovers_the_single_bubble_optimum() {
    for (n, p) in [(4, 2.5), (4, 2.0), (5, 2.0)] {
        let re = energy(n, p);
        let ds = re.single_bubble_d_star().unwrap();
        let r = re
            .find_critical(&Configuration::single(1.0, point(n, &[0.3])), 1e-10)
            .unwrap();
        assert!(r.converged && r.grad_norm <= 1e-10);
        assert_relative_eq!(r.config.deltas[0], ds, max_relative = 1e-6);
        assert!(r.config.points[0].iter().all(|v| v.abs() <= 1e-6));
        // a nondegenerate minimum
        assert_eq!(r.hessian_det_sign, 1);
    }
}

#[test]
fn restarts_agree() {
    let re = energy(4, 2.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let first = re
        .find_critical(&random_config(&re, 1, &mut rng), 1e-10)
        .unwrap();
    for _ in 0..9 {
        let r = re
            .find_critical(&random_config(&re, 1, &mut rng), 1e-10)
            .unwrap();
        assert_eq!(r.hessian_det_sign, first.hessian_det_sign);
        for (a, b) in r.config.points[0].iter().zip(&first.config.points[0]) {
            assert!((a - b).abs() <= 1e-4);
        }
        assert_relative_eq!(
            r.config.deltas[0],
            first.config.deltas[0],
            max_relative = 1e-4
        );
    }
}

#[test]
fn analytic_gradient_matches_differences() {
    for (n, p) in [(4, 2.5), (4, 2.0), (5, 2.2)] {
        let re = energy(n, p);
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 100 + (p * 10.0) as u64);
        for t in 0..20 {
            let c = random_config(&re, 1 + t % 3, &mut rng);
            let g = re.grad_upsilon(&c).unwrap();
            let fd = re.fd_gradient(&c, 1e-5).unwrap();
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in g.iter().zip(&fd) {
                assert!(
                    (a - b).abs() <= 1e-6 * scale,
                    "N={n} p={p}: {g:?} vs {fd:?}"
                );
            }
        }
    }
}

#[test]
fn symmetric_pair_is_swap_invariant() {
    let re = energy(4, 2.5);
    let x = point(4, &[0.35]);
    let mx: Vec<f64> = x.iter().map(|v| -v).collect();
    let a = Configuration {
        deltas: vec![0.4, 0.4],
        points: vec![x.clone(), mx.clone()],
    };
    let b = Configuration {
        deltas: vec![0.4, 0.4],
        points: vec![mx, x],
    };
    assert_relative_eq!(
        re.upsilon(&a).unwrap(),
        re.upsilon(&b).unwrap(),
        max_relative = 1e-12
    );
}

#[test]
fn gradient_is_permutation_equivariant() {
    let re = energy(4, 2.5);
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = random_config(&re, 3, &mut rng);
    let perm = [2usize, 0, 1];
    let pc = Configuration {
        deltas: perm.iter().map(|&i| c.deltas[i]).collect(),
        points: perm.iter().map(|&i| c.points[i].clone()).collect(),
    };
    let g = re.grad_upsilon(&c).unwrap();
    let pg = re.grad_upsilon(&pc).unwrap();
    for (slot, &i) in perm.iter().enumerate() {
        assert_relative_eq!(pg[slot], g[i], max_relative = 1e-12);
        for c in 0..n {
            let (a, b) = (pg[3 + slot * n + c], g[3 + i * n + c]);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
        }
    }
}

#[test]
fn antipodal_pair_has_no_critical_point_on_the_ball() {
    // along x₂ = −x₁ = −t e₁, d̃₁ = d̃₂ the energy is 2d^{N−2}φ(t) − 2C₀ log d
    // with φ = τ(t e₁) − G(t e₁, −t e₁) strictly increasing, so ∇Υ ≠ 0 there
    let re = energy(4, 2.5);
    let phi = |t: f64| {
        let x = point(4, &[t]);
        let y = point(4, &[-t]);
        re.bundle.robin(&x).unwrap() - re.bundle.green(&x, &y).unwrap()
    };
    let ts: Vec<f64> = (1..95).map(|i| 0.01 * i as f64).collect();
    assert!(ts.windows(2).all(|w| phi(w[1]) > phi(w[0])));
    let ds = re.single_bubble_d_star().unwrap();
    let start = Configuration {
        deltas: vec![ds, ds],
        points: vec![point(4, &[0.3]), point(4, &[-0.3])],
    };
    let err = re.find_critical(&start, 1e-9).unwrap_err();
    assert!(
        matches!(
            err,
            Error::LeftAdmissibleSet(_) | Error::NoConvergence { .. }
        ),
        "{err:?}"
    );
}

#[test]
fn inadmissible_start_is_rejected() {
    let re = energy(4, 2.5);
    let err = re
        .find_critical(&Configuration::single(0.01, vec![0.0; 4]), 1e-9)
        .unwrap_err();
    assert!(matches!(err, Error::LeftAdmissibleSet(_)));
    let err = re
        .find_critical(&Configuration::single(1.0, point(4, &[0.97])), 1e-9)
        .unwrap_err();
    assert!(matches!(err, Error::LeftAdmissibleSet(_)));
}

#[test]
fn sub_regime_single_bubble_sits_at_the_center() {
    for (n, p) in [(4, 1.8), (5, 1.6)] {
        let re = energy(n, p);
        // radial reduction: Υ = d^κ θ̃(0) − C₀ log d, κ = N(p+1)/(q₀+1)
        let theta = wth_theta_center_series(&re.bundle).unwrap();
        let kappa = re.homogeneity();
        let oracle = bisect(
            |d: f64| kappa * d.powf(kappa) * theta - re.c0,
            1e-3,
            10.0,
            1e-15,
            200,
        )
        .unwrap()
        .value;
        let start = Configuration::single(1.1 * oracle, point(n, &[0.05, 0.02]));
        let r = re.find_critical(&start, 1e-9 * re.c0 / oracle).unwrap();
        assert!(r.converged);
        assert!(
            r.config.points[0].iter().all(|v| v.abs() <= 1e-4),
            "{:?}",
            r.config
        );
        assert_relative_eq!(r.config.deltas[0], oracle, max_relative = 1e-4);
        assert_eq!(r.hessian_det_sign, 1);
    }
}

#[test]
fn sub_regime_energy_is_homogeneous() {
    let re = energy(4, 1.5);
    let x = point(4, &[0.2]);
    let base = re.upsilon(&Configuration::single(1.0, x.clone())).unwrap();
    for c in [0.5, 2.0] {
        let u = re.upsilon(&Configuration::single(c, x.clone())).unwrap();
        assert_relative_eq!(
            u,
            c.powf(re.homogeneity()) * base - re.c0 * c.ln(),
            max_relative = 1e-9
        );
    }
}

#[test]
fn super_schedule_is_a_power() {
    let re = energy(4, 2.5);
    assert_relative_eq!(
        re.mu_schedule(1e-4, 2.0).unwrap(),
        2e-2,
        max_relative = 1e-14
    );
    assert!(matches!(re.mu_schedule(0.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn serrin_schedule_solves_its_identity() {
    for n in [4usize, 5] {
        let re = energy(n, n as f64 / (n as f64 - 2.0));
        let nf = n as f64;
        for eps in logspace(1e-8, 1e-2, 25) {
            let mu = re.mu_schedule(eps, 1.0).unwrap();
            let lhs = mu.powf(nf - 2.0) * mu.ln();
            assert!((lhs + eps).abs() <= 1e-10 * eps, "eps {eps}: {lhs}");
            assert_relative_eq!(
                re.mu_schedule(eps, 3.0).unwrap(),
                3.0 * mu,
                max_relative = 1e-14
            );
        }
        // asymptotic form for small ε
        let eps = 1e-6;
        let approx = ((nf - 2.0) * eps / eps.ln().abs()).powf(1.0 / (nf - 2.0));
        let mu = re.mu_schedule(eps, 1.0).unwrap();
        assert!((mu / approx - 1.0).abs() < 0.1, "{mu} vs {approx}");
        // −(N−2)ε below −1/e
        assert!(matches!(re.mu_schedule(0.5, 1.0), Err(Error::Domain(_))));
    }
}

#[test]
fn sub_schedule_has_only_the_printed_branch() {
    let re = energy(4, 1.3);
    assert_relative_eq!(
        re.mu_schedule(1e-3, 1.5).unwrap(),
        1.5 * 1e-3f64.powf(1.0 / 0.6),
        max_relative = 1e-14
    );
    let re = energy(4, 1.8);
    assert!(matches!(
        re.mu_schedule(1e-3, 1.0),
        Err(Error::UnprintedBranch { .. })
    ));
}

#[test]
fn predicted_rates_assemble_the_constants() {
    let re = energy(4, 2.5);
    let crit = re
        .find_critical(&Configuration::single(1.0, point(4, &[0.3])), 1e-10)
        .unwrap();
    let rates = re.predicted_rates(&crit).unwrap();
    let c = &re.constants;
    let expected = 2.0 * c.a1 * c.a2.unwrap() * re.bundle.gamma_n / c.s_power();
    assert!(rates.limit > 0.0);
    assert_relative_eq!(rates.limit, expected, max_relative = 1e-9);
    assert_relative_eq!(rates.sup_power, 4.0 / 3.0 + 1.0, max_relative = 1e-14);
    // the v-profile coefficient is ∫U^{q₀}, checked against its second route
    assert_relative_eq!(rates.outer_v, c.a1_alt, max_relative = 5e-3);

    let re = energy(4, 2.0);
    let crit = re
        .find_critical(&Configuration::single(1.0, point(4, &[0.3])), 1e-10)
        .unwrap();
    let rates = re.predicted_rates(&crit).unwrap();
    assert!(rates.log_corrected && rates.limit > 0.0);
    let c = &re.constants;
    let sb = sphere_area::<f64>(4) * c.b.powf(2.0);
    assert_relative_eq!(
        rates.limit,
        3.0 * sb * c.a1 * re.bundle.gamma_n / c.s_power(),
        max_relative = 1e-9
    );
}

#[test]
fn sub_rate_uses_the_center_regular_part() {
    let re = energy(4, 1.8);
    let theta = wth_theta_center_series(&re.bundle).unwrap();
    let kappa = re.homogeneity();
    let d = (re.c0 / (kappa * theta)).powf(1.0 / kappa);
    let crit = re
        .find_critical(
            &Configuration::single(d, point(4, &[0.02])),
            1e-9 * re.c0 / d,
        )
        .unwrap();
    let rates = re.predicted_rates(&crit).unwrap();
    let c = &re.constants;
    let expected = re.exp.alpha0() * c.a1.powf(2.8) * theta / c.s_power();
    assert_eq!(rates.per_bubble.len(), 1);
    assert_eq!(rates.per_bubble[0], rates.limit);
    assert_relative_eq!(rates.limit, expected, max_relative = 1e-5);
}

#[test]
fn report_serializes_with_the_documented_keys() {
    let re = energy(4, 2.5);
    let crit = re
        .find_critical(&Configuration::single(1.0, point(4, &[0.3])), 1e-10)
        .unwrap();
    let report = re.report(&crit).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    for key in [
        "regime",
        "C0",
        "d_star",
        "x_star",
        "grad_norm",
        "hess_sign",
        "rates",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    let back: ReducedReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaling_shifts_by_the_homogeneous_part(
        c in 0.3f64..3.0,
        d1 in 0.2f64..2.0,
        d2 in 0.2f64..2.0,
        t in 0.15f64..0.6,
    ) {
        let re = energy(4, 2.5);
        let x = vec![point(4, &[t]), point(4, &[-0.5 * t, 0.4])];
        let a = Configuration { deltas: vec![d1, d2], points: x.clone() };
        let b = Configuration { deltas: vec![c * d1, c * d2], points: x };
        let logs = d1.ln() + d2.ln();
        let ua = re.upsilon(&a).unwrap();
        let ub = re.upsilon(&b).unwrap();
        let expected = c.powf(re.homogeneity()) * (ua + re.c0 * logs) - re.c0 * logs - 2.0 * re.c0 * c.ln();
        prop_assert!((ub - expected).abs() <= 1e-10 * ub.abs().max(1.0));
    }
}

//! Scaled and translated bubbles and the kernel of the linearized system.

use super::profile::RadialProfile;

fn offset(mu: f64, xi: &[f64], x: &[f64]) -> (Vec<f64>, f64) {
    let y: Vec<f64> = x.iter().zip(xi).map(|(a, b)| (a - b) / mu).collect();
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    (y, r)
}

/// (U_{μ,ξ}(x), V_{μ,ξ}(x)) = (μ^{−N/(q₀+1)} U((x−ξ)/μ), μ^{−N/(p+1)} V((x−ξ)/μ)).
pub fn eval_bubble(profile: &RadialProfile, mu: f64, xi: &[f64], x: &[f64]) -> (f64, f64) {
    let (_, r) = offset(mu, xi, x);
    let y = profile.state_at(r);
    let e = &profile.exp;
    (mu.powf(-e.alpha0()) * y[0], mu.powf(-e.beta0()) * y[2])
}

/// (Ψ^l_{μ,ξ}(x), Φ^l_{μ,ξ}(x)): l = 0 is the dilation mode
/// y·∇U + N U/(q₀+1) (and y·∇V + N V/(p+1)), l ≥ 1 the translation
/// modes ∂_l U and ∂_l V, each with its μ-scaling.
pub fn eval_kernels(
    profile: &RadialProfile,
    mu: f64,
    xi: &[f64],
    l: usize,
    x: &[f64],
) -> (f64, f64) {
    assert!(l <= xi.len(), "kernel index {l} exceeds the dimension");
    let e = &profile.exp;
    let (y, r) = offset(mu, xi, x);
    let s = profile.state_at(r);
    let (au, av) = (e.alpha0(), e.beta0());
    if l == 0 {
        (
            mu.powf(-au) * (r * s[1] + au * s[0]),
            mu.powf(-av) * (r * s[3] + av * s[2]),
        )
    } else {
        // ∂_l U(y) = U'(r) y_l / r, and U'(r)/r → U''(0) as r → 0
        let ratio = |d: f64, dd0: f64| if r > 0.0 { d / r } else { dd0 };
        let (uu0, vv0) = profile
            .system()
            .second_derivatives(0.0, 1.0, 0.0, profile.s, 0.0);
        (
            mu.powf(-au - 1.0) * ratio(s[1], uu0) * y[l - 1],
            mu.powf(-av - 1.0) * ratio(s[3], vv0) * y[l - 1],
        )
    }
}

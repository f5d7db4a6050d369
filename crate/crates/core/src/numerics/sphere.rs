//! Angular quadrature on the unit sphere S^{N-1} for integrands that depend
//! on the direction only through its projection onto a low-dimensional span.

use super::{gauss_legendre, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Surface measure |S^{n-1}| of the unit sphere in R^n.
pub fn sphere_area<T: Scalar>(n: usize) -> T {
    assert!(n >= 1);
    let two_pi = T::lit(2.0) * T::PI();
    let (mut k, mut a) = if n % 2 == 1 {
        (1usize, T::lit(2.0))
    } else {
        (2usize, two_pi)
    };
    while k < n {
        // |S^{k+1}| = 2π/k · |S^{k-1}|
        a = a * two_pi / T::from_usize(k).unwrap();
        k += 2;
    }
    a
}

/// Orthonormal basis of R^n whose leading vectors span `vectors` (in order,
/// skipping dependent ones), completed with coordinate directions. Returns the
/// basis and the rank of `vectors`.
pub fn orthonormal_frame<T: Scalar>(n: usize, vectors: &[&[T]]) -> (Vec<Vec<T>>, usize) {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(n);
    let tol = T::lit(1e-12);
    let push = |v: &[T], basis: &mut Vec<Vec<T>>| -> bool {
        let scale = super::norm2(v);
        if scale <= T::min_positive_value() {
            return false;
        }
        let mut w: Vec<T> = v.iter().map(|&x| x / scale).collect();
        // two passes of Gram–Schmidt for stability
        for _ in 0..2 {
            for b in basis.iter() {
                let d = w.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi = *wi - d * *bi;
                }
            }
        }
        let nrm = super::norm2(&w);
        if nrm <= tol {
            return false;
        }
        basis.push(w.into_iter().map(|x| x / nrm).collect());
        true
    };
    for v in vectors {
        if basis.len() < n {
            push(v, &mut basis);
        }
    }
    let rank = basis.len();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        push(&e, &mut basis);
    }
    (basis, rank)
}

/// Directions with weights such that Σ w f(ω) ≈ ∫_{S^{N-1}} f dσ.
#[derive(Debug, Clone)]
pub struct AngularRule<T> {
    pub directions: Vec<Vec<T>>,
    pub weights: Vec<T>,
    /// True when the weights come from random sampling.
    pub sampled: bool,
}

impl<T: Scalar> AngularRule<T> {
    /// Exact for integrands depending on ω only through ω·e1. `theta_edges`
    /// are panel breakpoints in [0, π], each carrying an `order`-point rule.
    pub fn axisymmetric(n: usize, frame: &[Vec<T>], theta_edges: &[T], order: usize) -> Self {
        assert!(n >= 2 && frame.len() >= 2);
        let gl = gauss_legendre::<T>(order);
        let s_lower = sphere_area::<T>(n - 1);
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        for w in theta_edges.windows(2) {
            for (th, wt) in gl.mapped(w[0], w[1]) {
                let (s, c) = th.sin_cos();
                let dir: Vec<T> = (0..n).map(|i| c * frame[0][i] + s * frame[1][i]).collect();
                directions.push(dir);
                weights.push(wt * s_lower * s.powi(n as i32 - 2));
            }
        }
        Self {
            directions,
            weights,
            sampled: false,
        }
    }

    /// Exact for integrands depending on ω through ω·e1 and ω·e2 (n ≥ 3).
    /// The polar angle θ is measured from e1, the azimuth φ ∈ [0, π] from e2.
    pub fn planar(
        n: usize,
        frame: &[Vec<T>],
        theta_edges: &[T],
        order: usize,
        phi_order: usize,
    ) -> Self {
        assert!(n >= 3 && frame.len() >= 3);
        let gl = gauss_legendre::<T>(order);
        let gphi = gauss_legendre::<T>(phi_order);
        let s_lower = sphere_area::<T>(n - 2);
        let half = T::PI() * T::lit(0.5);
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        for w in theta_edges.windows(2) {
            for (th, wt) in gl.mapped(w[0], w[1]) {
                let (s, c) = th.sin_cos();
                // two φ panels so the rule is symmetric about φ = π/2
                for (a, b) in [(T::zero(), half), (half, T::PI())] {
                    for (ph, wp) in gphi.mapped(a, b) {
                        let (sp, cp) = ph.sin_cos();
                        let dir: Vec<T> = (0..n)
                            .map(|i| c * frame[0][i] + s * (cp * frame[1][i] + sp * frame[2][i]))
                            .collect();
                        directions.push(dir);
                        weights
                            .push(wt * wp * s_lower * s.powi(n as i32 - 2) * sp.powi(n as i32 - 3));
                    }
                }
            }
        }
        Self {
            directions,
            weights,
            sampled: false,
        }
    }

    /// Uniform random directions from a seeded generator.
    pub fn monte_carlo(n: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let area = sphere_area::<T>(n);
        let w = area / T::from_usize(count).unwrap();
        let mut directions = Vec::with_capacity(count);
        for _ in 0..count {
            loop {
                let v: Vec<f64> = (0..n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nrm > 1e-12 {
                    directions.push(v.iter().map(|x| T::lit(x / nrm)).collect());
                    break;
                }
            }
        }
        Self {
            directions,
            weights: vec![w; count],
            sampled: true,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Uniform panel edges on [0, π].
pub fn uniform_theta<T: Scalar>(panels: usize) -> Vec<T> {
    (0..=panels)
        .map(|i| T::PI() * T::from_usize(i).unwrap() / T::from_usize(panels).unwrap())
        .collect()
}

/// Panel edges on [0, π] graded geometrically toward θ = 0 down to `theta_min`.
pub fn graded_theta<T: Scalar>(theta_min: T, uniform_panels: usize) -> Vec<T> {
    let mut edges = vec![T::zero()];
    let first = T::PI() / T::from_usize(uniform_panels).unwrap();
    let mut small = Vec::new();
    let mut t = first;
    while t > theta_min {
        t = t * T::lit(0.25);
        small.push(t);
    }
    small.reverse();
    edges.extend(small);
    edges.extend(uniform_theta::<T>(uniform_panels).into_iter().skip(1));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn areas() {
        assert_relative_eq!(
            sphere_area::<f64>(2),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            sphere_area::<f64>(3),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-15
        );
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(sphere_area::<f64>(4), 2.0 * pi2, max_relative = 1e-15);
        assert_relative_eq!(sphere_area::<f64>(5), 8.0 * pi2 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn rules_integrate_constants_and_moments() {
        for n in [3usize, 4, 5, 6] {
            let (frame, _) = orthonormal_frame::<f64>(n, &[]);
            let area = sphere_area::<f64>(n);
            let ax = AngularRule::axisymmetric(n, &frame, &uniform_theta(8), 8);
            let pl = AngularRule::planar(n, &frame, &uniform_theta(8), 12, 16);
            let s1: f64 = ax.weights.iter().sum();
            let s2: f64 = pl.weights.iter().sum();
            assert_relative_eq!(s1, area, max_relative = 1e-13);
            assert_relative_eq!(s2, area, max_relative = 1e-13);
            // ∫ ω_2² = |S|/n
            let m: f64 = pl
                .directions
                .iter()
                .zip(&pl.weights)
                .map(|(d, w)| w * d[1] * d[1])
                .sum();
            assert_relative_eq!(m, area / n as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn frame_rank() {
        let a = [1.0, 1.0, 0.0, 0.0];
        let b = [2.0, 2.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0, 0.0];
        let (f, r) = orthonormal_frame::<f64>(4, &[&a, &b, &c]);
        assert_eq!(r, 2);
        assert_eq!(f.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = f[i].iter().zip(&f[j]).map(|(x, y)| x * y).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}

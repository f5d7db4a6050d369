//! Green's function, Robin function and the derived potentials on the unit
//! ball: closed forms for G, H, τ; radial quadrature for the centered
//! G^p-potential; Poisson integrals for the harmonic extensions; and a
//! singular volume quadrature for configuration potentials.

mod harmonic;
mod potentials;
mod volume;

pub use harmonic::{bar_h, hat_h, poisson_extension, HarmonicValue};
pub use potentials::{
    a_coefficient, config_potentials, wtg_center, wtg_value, wth_theta, wth_theta_center_series,
    wth_value, ConfigPotentials, CENTER_OFFSETS,
};
pub use volume::{volume_integral, VolumeOptions, VolumeResult};

use crate::bubble::{ExponentPair, Regime};
use crate::error::{Error, Result};
use crate::numerics::sphere_area;
use serde::{Deserialize, Serialize};

/// The domain Ω. Only the unit ball centered at the origin is implemented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    pub n: usize,
    pub radius: f64,
    pub center: Vec<f64>,
}

impl BallDomain {
    pub fn unit(n: usize) -> Self {
        Self {
            n,
            radius: 1.0,
            center: vec![0.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.center.len() != self.n {
            return Err(Error::Invalid(format!(
                "ball in dimension {} with a center of length {}",
                self.n,
                self.center.len()
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Invalid(format!(
                "ball radius {} must be positive",
                self.radius
            )));
        }
        if self.radius != 1.0 || self.center.iter().any(|&c| c != 0.0) {
            return Err(Error::Invalid(
                "only the unit ball centered at the origin is implemented".into(),
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && dot(x, x) < 1.0
    }

    /// Distance from x to the boundary sphere.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        1.0 - dot(x, x).sqrt()
    }
}

/// Green-function data for one exponent pair on a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensBundle {
    pub domain: BallDomain,
    pub exp: ExponentPair,
    /// γ_N = 1/((N−2)|S^{N−1}|).
    pub gamma_n: f64,
    /// γ̃₁ with γ̃₁[(N−2)p−2][N−(N−2)p] = γ_N^p (p < N/(N−2)).
    pub gamma_tilde_1: Option<f64>,
    /// γ̃₂ with γ̃₂[(N−2)p−2(N−1)][N−(N−2)p] = pγ_N^{p−1} (p ∈ [(N−1)/(N−2), N/(N−2))).
    pub gamma_tilde_2: Option<f64>,
}

impl GreensBundle {
    pub fn new(domain: BallDomain, exp: ExponentPair) -> Result<Self> {
        domain.validate()?;
        if domain.n != exp.n {
            return Err(Error::Invalid(format!(
                "domain dimension {} differs from N = {}",
                domain.n, exp.n
            )));
        }
        let n = exp.nf();
        let p = exp.p;
        let area: f64 = sphere_area(exp.n);
        let gamma_n = 1.0 / ((n - 2.0) * area);
        let sub = exp.regime() == Regime::Sub;
        let e = n - (n - 2.0) * p;
        let gamma_tilde_1 = sub.then(|| gamma_n.powf(p) / (((n - 2.0) * p - 2.0) * e));
        let gamma_tilde_2 = (sub && p >= exp.second_threshold())
            .then(|| p * gamma_n.powf(p - 1.0) / (((n - 2.0) * p - 2.0 * (n - 1.0)) * e));
        Ok(Self {
            domain,
            exp,
            gamma_n,
            gamma_tilde_1,
            gamma_tilde_2,
        })
    }

    /// Unit ball in the dimension of `exp`.
    pub fn unit_ball(exp: ExponentPair) -> Result<Self> {
        Self::new(BallDomain::unit(exp.n), exp)
    }

    pub fn n(&self) -> usize {
        self.exp.n
    }

    pub fn regime(&self) -> Regime {
        self.exp.regime()
    }

    /// γ̃₁, or `WrongRegime` at or above the Serrin exponent.
    pub fn gamma_tilde_1(&self) -> Result<f64> {
        self.gamma_tilde_1.ok_or_else(|| {
            Error::WrongRegime(format!("γ̃₁ needs p < N/(N−2), got p = {}", self.exp.p))
        })
    }

    /// Whether the second singular term |x−ξ|^{N−(N−2)p} is subtracted.
    pub fn second_term(&self) -> bool {
        self.gamma_tilde_2.is_some()
    }

    pub(crate) fn require_sub(&self, what: &str) -> Result<()> {
        if self.regime() == Regime::Sub {
            Ok(())
        } else {
            Err(Error::WrongRegime(format!(
                "{what} needs p < N/(N−2), got p = {}",
                self.exp.p
            )))
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::Invalid(format!(
                "point {x:?} is not inside the unit ball"
            )));
        }
        Ok(())
    }

    /// Regular part H(x, ξ) = γ_N (|x|²|ξ|² − 2x·ξ + 1)^{(2−N)/2}.
    pub fn regular_part(&self, x: &[f64], xi: &[f64]) -> f64 {
        let n = self.exp.nf();
        let d = dot(x, x) * dot(xi, xi) - 2.0 * dot(x, xi) + 1.0;
        self.gamma_n * d.powf(0.5 * (2.0 - n))
    }

    /// G(x, ξ) = γ_N |x−ξ|^{2−N} − H(x, ξ).
    pub fn green(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(xi)?;
        let r = dist(x, xi);
        if r == 0.0 {
            return Err(Error::OnDiagonal);
        }
        Ok(self.green_unchecked(x, xi, r))
    }

    #[inline]
    pub(crate) fn green_unchecked(&self, x: &[f64], xi: &[f64], r: f64) -> f64 {
        let n = self.exp.nf();
        self.gamma_n * r.powf(2.0 - n) - self.regular_part(x, xi)
    }

    /// τ(ξ) = H(ξ, ξ) = γ_N (1−|ξ|²)^{2−N}.
    pub fn robin(&self, xi: &[f64]) -> Result<f64> {
        self.check_point(xi)?;
        Ok(self.gamma_n * (1.0 - dot(xi, xi)).powf(2.0 - self.exp.nf()))
    }

    /// ∇τ(ξ) = 2(N−2)γ_N (1−|ξ|²)^{1−N} ξ.
    pub fn robin_gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_point(xi)?;
        let n = self.exp.nf();
        let c = 2.0 * (n - 2.0) * self.gamma_n * (1.0 - dot(xi, xi)).powf(1.0 - n);
        Ok(xi.iter().map(|v| c * v).collect())
    }

    /// ∇_x G(x, ξ).
    pub fn green_gradient(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(xi)?;
        let n = self.exp.nf();
        let r = dist(x, xi);
        if r == 0.0 {
            return Err(Error::OnDiagonal);
        }
        let d = dot(x, x) * dot(xi, xi) - 2.0 * dot(x, xi) + 1.0;
        let s = dot(xi, xi);
        let ch = self.gamma_n * (2.0 - n) * d.powf(-0.5 * n);
        let cs = self.gamma_n * (2.0 - n) * r.powf(-n);
        Ok((0..x.len())
            .map(|i| cs * (x[i] - xi[i]) - ch * (s * x[i] - xi[i]))
            .collect())
    }
}

/// Poles ξ_i with concentration parameters δ_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub deltas: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl Configuration {
    pub fn single(delta: f64, point: Vec<f64>) -> Self {
        Self {
            deltas: vec![delta],
            points: vec![point],
        }
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    /// Positive δ's, distinct interior poles of the right dimension.
    pub fn validate(&self, bundle: &GreensBundle) -> Result<()> {
        if self.deltas.len() != self.points.len() || self.points.is_empty() {
            return Err(Error::Invalid(format!(
                "configuration has {} deltas and {} points",
                self.deltas.len(),
                self.points.len()
            )));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::Invalid(format!(
                "concentration parameter {d} must be positive"
            )));
        }
        for (i, x) in self.points.iter().enumerate() {
            if !bundle.domain.contains(x) {
                return Err(Error::Invalid(format!(
                    "pole {x:?} is not inside the unit ball"
                )));
            }
            if self.points[..i].iter().any(|y| dist(x, y) == 0.0) {
                return Err(Error::Invalid(format!("pole {x:?} is repeated")));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

//! The reduced energy Υ_{p,k} on configurations (d̃, x), its critical points,
//! the concentration schedule μ(ε) and the predicted blow-up rates.
//!
//! Configurations are packed as [d̃₁..d̃_k, x₁..x_k] (k + kN entries).

use crate::bubble::{compute_constants, BubbleConstants, ExponentPair, RadialProfile, Regime};
use crate::error::{Error, Result};
use crate::greens::{wth_theta, wth_value, Configuration, GreensBundle, VolumeOptions};
use crate::numerics::{determinant, lambert_wm1, norm_inf, solve_linear, sphere_area};
use serde::{Deserialize, Serialize};

/// Default ρ̃ of the admissible set Λ_ρ̃.
pub const DEFAULT_RHO: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedEnergy {
    pub exp: ExponentPair,
    pub constants: BubbleConstants,
    pub bundle: GreensBundle,
    pub regime: Regime,
    pub c0: f64,
    /// ρ̃ of the admissible set.
    pub rho: f64,
    /// Relative step of the finite-difference gradient (sub regime).
    pub grad_step: f64,
    /// Relative step of the finite-difference Hessian.
    pub hess_step: f64,
    pub volume: VolumeOptions,
}

impl ReducedEnergy {
    pub fn new(constants: BubbleConstants, bundle: GreensBundle) -> Result<Self> {
        let exp = bundle.exp;
        if constants.n != exp.n || (constants.p - exp.p).abs() > 1e-12 {
            return Err(Error::Invalid(format!(
                "constants for (N, p) = ({}, {}) do not match the bundle ({}, {})",
                constants.n, constants.p, exp.n, exp.p
            )));
        }
        let regime = exp.regime();
        let sp = constants.s_power();
        let c0 = match regime {
            Regime::Super => {
                let a2 = constants
                    .a2()
                    .map_err(|e| Error::MissingConstant(e.to_string()))?;
                sp / (constants.a1 * a2)
            }
            Regime::Serrin => {
                sp / (sphere_area::<f64>(exp.n) * constants.b.powf(exp.p) * constants.a1)
            }
            Regime::Sub => (exp.p + 1.0) * constants.a1.powf(-(exp.p + 1.0)) * sp,
        };
        let sub = regime == Regime::Sub;
        Ok(Self {
            exp,
            constants,
            bundle,
            regime,
            c0,
            rho: DEFAULT_RHO,
            grad_step: 1e-4,
            hess_step: if sub { 1e-3 } else { 1e-4 },
            volume: VolumeOptions::default(),
        })
    }

    /// Constants of `profile` on the unit ball.
    pub fn from_profile(profile: &RadialProfile) -> Result<Self> {
        let constants = compute_constants(profile)?;
        let bundle = GreensBundle::unit_ball(profile.exp.with_eps(0.0)?)?;
        Self::new(constants, bundle)
    }

    pub fn n(&self) -> usize {
        self.exp.n
    }

    /// Degree of homogeneity of Υ + C₀ Σ log d̃ᵢ under d̃ ↦ c d̃.
    pub fn homogeneity(&self) -> f64 {
        match self.regime {
            Regime::Sub => self.exp.alpha0() * (self.exp.p + 1.0),
            _ => self.exp.nf() - 2.0,
        }
    }

    pub fn pack(&self, config: &Configuration) -> Vec<f64> {
        let mut z = config.deltas.clone();
        for x in &config.points {
            z.extend_from_slice(x);
        }
        z
    }

    pub fn unpack(&self, z: &[f64]) -> Result<Configuration> {
        let n = self.n();
        if z.is_empty() || !z.len().is_multiple_of(n + 1) {
            return Err(Error::Invalid(format!(
                "packed configuration of length {} for N = {n}",
                z.len()
            )));
        }
        let k = z.len() / (n + 1);
        Ok(Configuration {
            deltas: z[..k].to_vec(),
            points: z[k..].chunks(n).map(|c| c.to_vec()).collect(),
        })
    }

    /// Whether the configuration lies in Λ_ρ̃.
    pub fn admissible(&self, config: &Configuration) -> bool {
        let r = self.rho;
        config.deltas.iter().all(|&d| d > r && d < 1.0 / r)
            && config.points.iter().all(|x| {
                self.bundle.domain.contains(x) && self.bundle.domain.boundary_distance(x) >= r
            })
            && config.points.iter().enumerate().all(|(i, x)| {
                config.points[..i].iter().all(|y| {
                    x.iter()
                        .zip(y)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                        >= r
                })
            })
    }

    /// Υ_{p,k}(d̃, x).
    pub fn upsilon(&self, config: &Configuration) -> Result<f64> {
        config.validate(&self.bundle)?;
        let log_sum: f64 = config.deltas.iter().map(|d| d.ln()).sum();
        let k = config.k();
        match self.regime {
            Regime::Sub => {
                let a = self.exp.alpha0();
                let mut s = 0.0;
                for i in 0..k {
                    let (h, _) =
                        wth_value(&self.bundle, config, &config.points[i], i, &self.volume)?;
                    s += config.deltas[i].powf(a) * h;
                }
                Ok(s - self.c0 * log_sum)
            }
            _ => {
                let n = self.exp.nf();
                let (a, b) = (self.exp.alpha0(), self.exp.beta0());
                let d = &config.deltas;
                let x = &config.points;
                let mut s = 0.0;
                for i in 0..k {
                    s += d[i].powf(n - 2.0) * self.bundle.robin(&x[i])?;
                    for j in 0..k {
                        if j != i {
                            let w = d[i].powf(b) * d[j].powf(a) + d[i].powf(a) * d[j].powf(b);
                            s -= 0.5 * w * self.bundle.green(&x[i], &x[j])?;
                        }
                    }
                }
                Ok(s - self.c0 * log_sum)
            }
        }
    }

    /// ∇Υ with respect to (d̃₁..d̃_k, x₁..x_k): closed form at and above the
    /// Serrin exponent, central differences of Υ below it.
    pub fn grad_upsilon(&self, config: &Configuration) -> Result<Vec<f64>> {
        if self.regime == Regime::Sub {
            return self.fd_gradient(config, self.grad_step);
        }
        config.validate(&self.bundle)?;
        let n = self.exp.nf();
        let nn = self.n();
        let (a, b) = (self.exp.alpha0(), self.exp.beta0());
        let k = config.k();
        let d = &config.deltas;
        let x = &config.points;
        let mut g = vec![0.0; k * (nn + 1)];
        for i in 0..k {
            let mut gd =
                (n - 2.0) * d[i].powf(n - 3.0) * self.bundle.robin(&x[i])? - self.c0 / d[i];
            let grad_tau = self.bundle.robin_gradient(&x[i])?;
            let mut gx: Vec<f64> = grad_tau.iter().map(|t| d[i].powf(n - 2.0) * t).collect();
            for j in 0..k {
                if j == i {
                    continue;
                }
                let gij = self.bundle.green(&x[i], &x[j])?;
                gd -= (b * d[i].powf(b - 1.0) * d[j].powf(a)
                    + a * d[i].powf(a - 1.0) * d[j].powf(b))
                    * gij;
                let w = d[i].powf(b) * d[j].powf(a) + d[i].powf(a) * d[j].powf(b);
                for (c, v) in self.bundle.green_gradient(&x[i], &x[j])?.iter().enumerate() {
                    gx[c] -= w * v;
                }
            }
            g[i] = gd;
            g[k + i * nn..k + (i + 1) * nn].copy_from_slice(&gx);
        }
        Ok(g)
    }

    /// Central-difference gradient of Υ with steps `rel`·d̃ᵢ and `rel` in x.
    pub fn fd_gradient(&self, config: &Configuration, rel: f64) -> Result<Vec<f64>> {
        let z = self.pack(config);
        let k = config.k();
        let mut g = vec![0.0; z.len()];
        let mut zp = z.clone();
        for c in 0..z.len() {
            let h = if c < k { rel * z[c] } else { rel };
            zp[c] = z[c] + h;
            let fp = self.upsilon(&self.unpack(&zp)?)?;
            zp[c] = z[c] - h;
            let fm = self.upsilon(&self.unpack(&zp)?)?;
            zp[c] = z[c];
            g[c] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    /// Symmetrized finite-difference Hessian (row-major).
    pub fn hessian(&self, config: &Configuration) -> Result<Vec<f64>> {
        let z = self.pack(config);
        let m = z.len();
        let k = config.k();
        let mut hess = vec![0.0; m * m];
        let mut zp = z.clone();
        for c in 0..m {
            let h = if c < k {
                self.hess_step * z[c]
            } else {
                self.hess_step
            };
            zp[c] = z[c] + h;
            let gp = self.grad_upsilon(&self.unpack(&zp)?)?;
            zp[c] = z[c] - h;
            let gm = self.grad_upsilon(&self.unpack(&zp)?)?;
            zp[c] = z[c];
            for r in 0..m {
                hess[r * m + c] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        for r in 0..m {
            for c in 0..r {
                let s = 0.5 * (hess[r * m + c] + hess[c * m + r]);
                hess[r * m + c] = s;
                hess[c * m + r] = s;
            }
        }
        Ok(hess)
    }

    /// Sign of the Hessian determinant; 0 when it is below round-off of the
    /// product of the row norms.
    pub fn hessian_sign(&self, config: &Configuration) -> Result<i8> {
        let hess = self.hessian(config)?;
        let m = config.k() * (self.n() + 1);
        let det = determinant(&hess, m);
        let scale: f64 = hess
            .chunks(m)
            .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
            .product();
        Ok(if det.abs() <= 1e-10 * scale {
            0
        } else if det > 0.0 {
            1
        } else {
            -1
        })
    }

    /// Projects d̃ and |x| into Λ_ρ̃; returns whether anything was clipped.
    fn project(&self, z: &mut [f64], k: usize) -> bool {
        let n = self.n();
        let r = self.rho;
        let mut clipped = false;
        for d in z[..k].iter_mut() {
            let c = d.clamp(r * (1.0 + 1e-9), (1.0 - 1e-9) / r);
            clipped |= c != *d;
            *d = c;
        }
        for x in z[k..].chunks_mut(n) {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1.0 - r {
                let s = (1.0 - r) / norm;
                x.iter_mut().for_each(|v| *v *= s);
                clipped = true;
            }
        }
        clipped
    }

    /// Newton on ∇Υ with iterates projected to Λ_ρ̃. Fails with
    /// `LeftAdmissibleSet` when the iteration is driven to the boundary of Λ_ρ̃
    /// and with `NoConvergence` otherwise.
    pub fn find_critical(&self, config0: &Configuration, tol: f64) -> Result<CriticalPointReport> {
        const MAX_ITER: usize = 60;
        config0.validate(&self.bundle)?;
        if !self.admissible(config0) {
            return Err(Error::LeftAdmissibleSet(
                "the starting configuration is not admissible".into(),
            ));
        }
        let k = config0.k();
        let mut z = self.pack(config0);
        let mut g = self.grad_upsilon(config0)?;
        let mut res = norm_inf(&g);
        let mut pinned = 0;
        for it in 0..MAX_ITER {
            if res <= tol {
                let config = self.unpack(&z)?;
                let sign = self.hessian_sign(&config)?;
                return Ok(CriticalPointReport {
                    config,
                    grad_norm: res,
                    hessian_det_sign: sign,
                    converged: true,
                    iterations: it,
                });
            }
            let cfg = self.unpack(&z)?;
            let hess = self.hessian(&cfg)?;
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let dz = solve_linear(&hess, &rhs).unwrap_or(rhs);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let mut zt: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + lambda * b).collect();
                let clipped = self.project(&mut zt, k);
                if let Ok(ct) = self.unpack(&zt) {
                    if self.admissible(&ct) {
                        if let Ok(gt) = self.grad_upsilon(&ct) {
                            let rt = norm_inf(&gt);
                            if rt.is_finite() && rt < res {
                                accepted = Some((zt, gt, rt, clipped));
                                break;
                            }
                        }
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((zt, gt, rt, clipped)) => {
                    z = zt;
                    g = gt;
                    res = rt;
                    pinned = if clipped { pinned + 1 } else { 0 };
                    if pinned >= 5 {
                        return Err(Error::LeftAdmissibleSet(format!(
                            "Newton iterates held at the boundary of the admissible set (gradient {res:e})"
                        )));
                    }
                }
                None => {
                    let mut probe: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
                    if self.project(&mut probe, k)
                        || !self
                            .unpack(&probe)
                            .map(|c| self.admissible(&c))
                            .unwrap_or(false)
                    {
                        return Err(Error::LeftAdmissibleSet(format!(
                            "the Newton step leaves the admissible set (gradient {res:e})"
                        )));
                    }
                    return Err(Error::NoConvergence {
                        stage: "critical point line search".into(),
                        iterations: it + 1,
                        residual: res,
                    });
                }
            }
        }
        Err(Error::NoConvergence {
            stage: "critical point".into(),
            iterations: MAX_ITER,
            residual: res,
        })
    }

    /// Closed-form k = 1 critical point on the ball above the Serrin
    /// exponent: x = 0, d̃ = (C₀/((N−2)τ(0)))^{1/(N−2)}.
    pub fn single_bubble_d_star(&self) -> Result<f64> {
        if self.regime == Regime::Sub {
            return Err(Error::WrongRegime(
                "the closed-form d̃* uses the τ branch of Υ".into(),
            ));
        }
        let n = self.exp.nf();
        Ok((self.c0 / ((n - 2.0) * self.bundle.gamma_n)).powf(1.0 / (n - 2.0)))
    }

    /// Concentration parameter μ_ε for the scaled parameter d̃.
    pub fn mu_schedule(&self, eps: f64, d_tilde: f64) -> Result<f64> {
        if !(eps > 0.0) || !(d_tilde > 0.0) {
            return Err(Error::Domain(format!(
                "mu_schedule needs eps, d̃ > 0, got {eps}, {d_tilde}"
            )));
        }
        let n = self.exp.nf();
        let p = self.exp.p;
        match self.regime {
            Regime::Super => Ok(eps.powf(1.0 / (n - 2.0)) * d_tilde),
            Regime::Serrin => {
                let x = -(n - 2.0) * eps;
                if x < -(-1.0f64).exp() {
                    return Err(Error::Domain(format!("−(N−2)ε = {x} is below −1/e")));
                }
                let w = lambert_wm1(x)?;
                Ok((x / w).powf(1.0 / (n - 2.0)) * d_tilde)
            }
            Regime::Sub => {
                let hi = self.exp.second_threshold();
                if p >= hi {
                    return Err(Error::UnprintedBranch {
                        p,
                        lo: hi,
                        hi: self.exp.serrin_exponent(),
                    });
                }
                Ok(eps.powf(1.0 / ((n - 2.0) * p - 2.0)) * d_tilde)
            }
        }
    }

    /// Limits of Theorems 1.2(2)/(3) and 1.3(2)/(3) at the critical point.
    pub fn predicted_rates(&self, crit: &CriticalPointReport) -> Result<RateRecord> {
        if !crit.converged {
            return Err(Error::Invalid(
                "predicted rates need a converged critical point".into(),
            ));
        }
        let n = self.exp.nf();
        let p = self.exp.p;
        let c = &self.constants;
        let inv_s = 1.0 / c.s_power();
        let config = &crit.config;
        let xi0 = config.points[0].clone();
        match self.regime {
            Regime::Super => {
                let a2 = c
                    .a2()
                    .map_err(|_| Error::MissingConstant("A₂ = ∫V^p diverges".into()))?;
                let tau = self.bundle.robin(&xi0)?;
                Ok(RateRecord {
                    regime: self.regime,
                    sup_power: n / ((n - 2.0) * p - 2.0) + 1.0,
                    log_corrected: false,
                    limit: (n - 2.0) * inv_s * c.a1 * a2 * tau,
                    per_bubble: vec![],
                    xi: config.points.clone(),
                    outer_v: c.a1,
                    outer_u_power: n / ((n - 2.0) * p - 2.0),
                    outer_u: a2,
                })
            }
            Regime::Serrin => {
                let tau = self.bundle.robin(&xi0)?;
                let sb = sphere_area::<f64>(self.n()) * c.b.powf(n / (n - 2.0));
                Ok(RateRecord {
                    regime: self.regime,
                    sup_power: n / (n - 2.0) + 1.0,
                    log_corrected: true,
                    limit: (p + 1.0) * sb * inv_s * c.a1 * tau,
                    per_bubble: vec![],
                    xi: config.points.clone(),
                    outer_v: c.a1,
                    outer_u_power: n / (n - 2.0),
                    outer_u: (p + 1.0) / (n - 2.0) * sb,
                })
            }
            Regime::Sub => {
                let a = self.exp.alpha0();
                // δᵢ = λ₁/λᵢ = d̃ᵢ/d̃₁
                let deltas: Vec<f64> = config.deltas.iter().map(|d| d / config.deltas[0]).collect();
                let rel = Configuration {
                    deltas: deltas.clone(),
                    points: config.points.clone(),
                };
                let coef = a * inv_s * c.a1.powf(p + 1.0);
                let mut per = Vec::with_capacity(config.k());
                for i in 0..config.k() {
                    let h = if config.k() == 1 {
                        // δ^{−Np/(q₀+1)} H̃ reduces to θ̃ for a single pole
                        wth_theta(&self.bundle, &xi0)?
                    } else {
                        let (h, _) =
                            wth_value(&self.bundle, &rel, &rel.points[i], i, &self.volume)?;
                        deltas[i].powf(-a * p) * h
                    };
                    per.push(coef * h);
                }
                Ok(RateRecord {
                    regime: self.regime,
                    sup_power: p + 1.0,
                    log_corrected: false,
                    limit: per[0],
                    per_bubble: per,
                    xi: config.points.clone(),
                    outer_v: c.a1,
                    outer_u_power: p,
                    outer_u: c.a1.powf(p),
                })
            }
        }
    }

    /// The JSON-ready summary of a critical point and its rates.
    pub fn report(&self, crit: &CriticalPointReport) -> Result<ReducedReport> {
        let rates = if crit.converged {
            Some(self.predicted_rates(crit)?)
        } else {
            None
        };
        Ok(ReducedReport {
            regime: self.regime,
            n: self.n(),
            p: self.exp.p,
            c0: self.c0,
            d_star: crit.config.deltas.clone(),
            x_star: crit.config.points.clone(),
            grad_norm: crit.grad_norm,
            hess_sign: crit.hessian_det_sign,
            converged: crit.converged,
            rates,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub config: Configuration,
    pub grad_norm: f64,
    /// Sign of det ∇²Υ; the local degree at a nondegenerate critical point.
    pub hessian_det_sign: i8,
    pub converged: bool,
    pub iterations: usize,
}

/// Predicted limits for a single blow-up branch.
///
/// The rate is lim ε·M^σ (divided by log M when `log_corrected`) with M the
/// sup of u and σ = `sup_power`. The outer profiles are
/// M·v → `outer_v`·Σ δᵢ^{N/(q₀+1)} G(·, ξᵢ), and M^{`outer_u_power`}·u → `outer_u`
/// times G(·, ξ₀) (divided by log M at the Serrin exponent), or times G̃ in the
/// sub regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub regime: Regime,
    pub sup_power: f64,
    pub log_corrected: bool,
    pub limit: f64,
    /// Per-bubble limits (sub regime); equal across i at a true blow-up
    /// configuration.
    pub per_bubble: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
    pub outer_v: f64,
    pub outer_u_power: f64,
    pub outer_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedReport {
    pub regime: Regime,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub d_star: Vec<f64>,
    pub x_star: Vec<Vec<f64>>,
    pub grad_norm: f64,
    pub hess_sign: i8,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateRecord>,
}

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Width of the band around N/(N−2) treated as the Serrin exponent.
pub const SERRIN_BAND: f64 = 1e-9;

/// Decay regime of the bubble, set by p against the Serrin exponent N/(N−2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// p > N/(N−2): both components decay like r^{2−N}.
    Super,
    /// p = N/(N−2): U decays like r^{2−N} log r.
    Serrin,
    /// p < N/(N−2): U decays like r^{2−(N−2)p}.
    Sub,
}

impl Regime {
    pub fn classify(n: usize, p: f64) -> Regime {
        let ps = n as f64 / (n as f64 - 2.0);
        if (p - ps).abs() <= SERRIN_BAND {
            Regime::Serrin
        } else if p > ps {
            Regime::Super
        } else {
            Regime::Sub
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Super => "super",
            Regime::Serrin => "serrin",
            Regime::Sub => "sub",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "super" => Ok(Regime::Super),
            "serrin" => Ok(Regime::Serrin),
            "sub" => Ok(Regime::Sub),
            _ => Err(Error::Invalid(format!("unknown regime '{s}'"))),
        }
    }
}

/// Exponent data of the system with p fixed and q = q_ε on the shifted
/// hyperbola 1/(p+1) + 1/(q_ε+1) = (N−2+ε)/N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    pub q_eps: f64,
    pub q0: f64,
    pub alpha_eps: f64,
    pub beta_eps: f64,
}

fn q_of(n: f64, p: f64, eps: f64) -> f64 {
    n / ((n - 2.0 + eps) - n / (p + 1.0)) - 1.0
}

/// Builds the exponent data for dimension `n`, power `p` and shift `eps`.
pub fn make_exponents(n: usize, p: f64, eps: f64) -> Result<ExponentPair> {
    if n < 3 {
        return Err(Error::InvalidExponent(format!(
            "dimension N = {n} must be at least 3"
        )));
    }
    let nf = n as f64;
    let (lo, hi) = (2.0 / (nf - 2.0), (nf + 2.0) / (nf - 2.0));
    if !(p > lo && p <= hi) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!(
            "p = {p} outside ({lo}, {hi}] for N = {n}"
        )));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidExponent(format!(
            "eps = {eps} must be non-negative"
        )));
    }
    let q0 = q_of(nf, p, 0.0);
    let denom = (nf - 2.0 + eps) - nf / (p + 1.0);
    let q_eps = q_of(nf, p, eps);
    if !(denom > 0.0) || !(q_eps > 0.0) || !(p * q_eps > 1.0) {
        return Err(Error::InvalidExponent(format!(
            "eps = {eps} leaves the admissible range (q_eps = {q_eps})"
        )));
    }
    let pq = p * q_eps - 1.0;
    Ok(ExponentPair {
        n,
        p,
        eps,
        q_eps,
        q0,
        alpha_eps: 2.0 * (p + 1.0) / pq,
        beta_eps: 2.0 * (q_eps + 1.0) / pq,
    })
}

impl ExponentPair {
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn regime(&self) -> Regime {
        Regime::classify(self.n, self.p)
    }

    /// Same (N, p) at a different shift.
    pub fn with_eps(&self, eps: f64) -> Result<ExponentPair> {
        make_exponents(self.n, self.p, eps)
    }

    /// N/(N−2).
    pub fn serrin_exponent(&self) -> f64 {
        self.nf() / (self.nf() - 2.0)
    }

    /// (N−1)/(N−2): above it the second singular term enters the regular part.
    pub fn second_threshold(&self) -> f64 {
        (self.nf() - 1.0) / (self.nf() - 2.0)
    }

    /// m = (N−2)p − 2, the sub-regime decay power of U.
    pub fn m(&self) -> f64 {
        (self.nf() - 2.0) * self.p - 2.0
    }

    /// κ₀ = (N−2)p − N.
    pub fn kappa0(&self) -> f64 {
        (self.nf() - 2.0) * self.p - self.nf()
    }

    /// α at ε = 0, equal to N/(q₀+1).
    pub fn alpha0(&self) -> f64 {
        self.nf() / (self.q0 + 1.0)
    }

    /// β at ε = 0, equal to N/(p+1).
    pub fn beta0(&self) -> f64 {
        self.nf() / (self.p + 1.0)
    }

    /// Residual of 1/(p+1) + 1/(q_ε+1) = (N−2+ε)/N.
    pub fn hyperbola_residual(&self) -> f64 {
        1.0 / (self.p + 1.0) + 1.0 / (self.q_eps + 1.0) - (self.nf() - 2.0 + self.eps) / self.nf()
    }

    /// q₀ − q_ε in the closed form ε(q₀+1)²/(N + ε(q₀+1)).
    pub fn q_gap(&self) -> f64 {
        let a = self.q0 + 1.0;
        self.eps * a * a / (self.nf() + self.eps * a)
    }

    /// Ordering conditions max{α,β} < min{N−2, m} and m·β > (N−2)·α.
    pub fn ordering_holds(&self) -> bool {
        let mx = self.alpha_eps.max(self.beta_eps);
        let nm2 = self.nf() - 2.0;
        mx < nm2.min(self.m()) && self.m() * self.beta_eps > nm2 * self.alpha_eps
    }

    /// Largest ε ≤ `eps_max` (to 1e−10) below which the ordering conditions
    /// hold, or `None` if they fail already at ε = 0.
    pub fn ordering_threshold(&self, eps_max: f64) -> Option<f64> {
        let at = |e: f64| {
            make_exponents(self.n, self.p, e)
                .map(|x| x.ordering_holds())
                .unwrap_or(false)
        };
        if !at(0.0) {
            return None;
        }
        if at(eps_max) {
            return Some(eps_max);
        }
        let (mut lo, mut hi) = (0.0, eps_max);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    /// The inequality ((N−2)p − 2)q₀ > N + 2 (checked, not proved).
    pub fn decay_inequality_holds(&self) -> bool {
        self.m() * self.q0 > self.nf() + 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_point() {
        let e = make_exponents(4, 3.0, 0.0).unwrap();
        assert_relative_eq!(e.q0, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn serrin_pair() {
        let e = make_exponents(4, 2.0, 0.0).unwrap();
        assert_relative_eq!(e.q0, 5.0, epsilon = 1e-13);
        assert_relative_eq!(e.alpha_eps, 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.beta_eps, 4.0 / 3.0, epsilon = 1e-14);
        assert_eq!(e.regime(), Regime::Serrin);
    }

    #[test]
    fn shifted() {
        let e = make_exponents(4, 3.0, 0.1).unwrap();
        assert_relative_eq!(e.q_eps, 4.0 / 1.1 - 1.0, epsilon = 1e-13);
        assert_relative_eq!(e.q0 - e.q_eps, e.q_gap(), epsilon = 1e-13);
    }

    #[test]
    fn out_of_range() {
        assert!(make_exponents(4, 3.5, 0.0).is_err());
        assert!(make_exponents(4, 0.9, 0.0).is_err());
        assert!(make_exponents(2, 1.5, 0.0).is_err());
        assert!(make_exponents(4, 2.0, -0.1).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::classify(5, 1.6), Regime::Sub);
        assert_eq!(Regime::classify(5, 5.0 / 3.0), Regime::Serrin);
        assert_eq!(Regime::classify(5, 2.0), Regime::Super);
    }
}

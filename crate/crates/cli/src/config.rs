//! Validated run configuration.

use crate::CliError;
use lane_emden::bubble::{make_exponents, Regime};
use lane_emden::greens::Configuration;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bubble,
    Constants,
    Greens,
    Reduced,
    Sweep,
    Verify,
}

/// Batteries of `verify`. The regime suites run at the configured (N, p);
/// `all` runs every acceptance criterion at its fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bubble,
    Greens,
    Super,
    Serrin,
    Sub,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Bubble => "bubble",
            Suite::Greens => "greens",
            Suite::Super => "super",
            Suite::Serrin => "serrin",
            Suite::Sub => "sub",
            Suite::All => "all",
        }
    }

    fn regime(self) -> Option<Regime> {
        match self {
            Suite::Super => Some(Regime::Super),
            Suite::Serrin => Some(Regime::Serrin),
            Suite::Sub => Some(Regime::Sub),
            _ => None,
        }
    }
}

/// Overrides of the library's numerical defaults; `None` keeps them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Integrator tolerance of the bubble and Dirichlet shots.
    pub ode_rtol: Option<f64>,
    /// Gradient tolerance of the critical-point search.
    pub newton_tol: Option<f64>,
    /// Accepted relative error of volume quadratures.
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub eps_schedule: Vec<f64>,
    pub k: usize,
    pub seed_config: Option<Configuration>,
    /// Regime the user asserts (N, p) to be in.
    pub regime: Option<Regime>,
    pub suite: Suite,
    /// Seed of every randomized step (random starts, Monte Carlo angles).
    pub seed: u64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn new(command: Command, n: usize, p: f64, output_dir: PathBuf) -> Self {
        Self {
            command,
            n,
            p,
            eps_schedule: default_schedule(),
            k: 1,
            seed_config: None,
            regime: None,
            suite: Suite::All,
            seed: 0x5eed,
            tolerances: Tolerances::default(),
            output_dir,
        }
    }

    /// Checks every field, naming the offending one.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.command == Command::Verify && self.suite == Suite::All {
            return self.validate_tolerances();
        }
        if self.n < 3 {
            return bad("N", format!("need N ≥ 3, got {}", self.n));
        }
        let exp =
            make_exponents(self.n, self.p, 0.0).map_err(|e| CliError::Config(format!("p: {e}")))?;
        let regime = exp.regime();
        if let Some(r) = self.regime {
            if r != regime {
                return bad(
                    "regime",
                    format!(
                        "p = {} is in the {} regime for N = {}",
                        self.p,
                        regime.name(),
                        self.n
                    ),
                );
            }
        }
        if self.command == Command::Verify {
            if let Some(r) = self.suite.regime() {
                if r != regime {
                    return bad(
                        "suite",
                        format!(
                            "the {} suite needs a {} exponent, p = {} is {}",
                            self.suite.name(),
                            r.name(),
                            self.p,
                            regime.name()
                        ),
                    );
                }
            }
        }
        if self.k == 0 {
            return bad("k", "need at least one bubble".into());
        }
        if let Some(c) = &self.seed_config {
            if c.deltas.len() != self.k || c.points.len() != self.k {
                return bad("seed-config", format!("expected {} bubbles", self.k));
            }
            if c.points.iter().any(|x| x.len() != self.n) {
                return bad(
                    "seed-config",
                    format!("points must have {} coordinates", self.n),
                );
            }
        }
        if self.eps_schedule.is_empty()
            || self
                .eps_schedule
                .iter()
                .any(|&e| !(e > 0.0 && e.is_finite()))
            || self.eps_schedule.windows(2).any(|w| !(w[1] < w[0]))
        {
            return bad(
                "eps",
                "the schedule must be positive and strictly decreasing".into(),
            );
        }
        if let Some(&e) = self.eps_schedule.first() {
            if make_exponents(self.n, self.p, e).is_err() {
                return bad(
                    "eps",
                    format!("ε = {e} leaves the admissible exponent range"),
                );
            }
        }
        self.validate_tolerances()
    }

    fn validate_tolerances(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("ode-rtol", t.ode_rtol),
            ("newton-tol", t.newton_tol),
            ("quad-tol", t.quad_tol),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(CliError::Config(format!(
                        "{name}: must lie in (0, 1), got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// File stem naming the (N, p) of this run.
    pub fn stem(&self) -> String {
        format!("N{}_p{}", self.n, self.p)
    }
}

/// Nine points log-spaced from 1e−1 down to 1e−5.
pub fn default_schedule() -> Vec<f64> {
    lane_emden::numerics::logspace(1e-1, 1e-5, 9)
}

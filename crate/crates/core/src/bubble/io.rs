//! Profile export/import: a CSV of node values and a JSON header.

use super::exponents::ExponentPair;
use super::profile::{GroundStateOptions, RadialProfile, TailLaw};
use crate::error::{Error, Result};
use crate::numerics::Grid1D;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Everything in a profile besides the node values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub schema: u32,
    pub n: usize,
    pub p: f64,
    pub q0: f64,
    pub a: f64,
    pub b: f64,
    pub r_max: f64,
    pub s: f64,
    pub s_bracket: [f64; 2],
    pub r_trust: f64,
    pub matching_jump: f64,
    pub exponents: ExponentPair,
    pub options: GroundStateOptions,
    pub tail: TailLaw,
}

impl RadialProfile {
    pub fn header(&self) -> ProfileHeader {
        ProfileHeader {
            schema: 1,
            n: self.exp.n,
            p: self.exp.p,
            q0: self.exp.q0,
            a: self.a,
            b: self.b,
            r_max: self.r_max,
            s: self.s,
            s_bracket: self.s_bracket,
            r_trust: self.r_trust,
            matching_jump: self.matching_jump,
            exponents: self.exp,
            options: self.options,
            tail: self.tail,
        }
    }

    /// CSV with columns r, U, V, dU, dV; values print in shortest
    /// round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,U,V,dU,dV\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?}",
                self.grid.nodes()[i],
                self.u[i],
                self.v[i],
                self.du[i],
                self.dv[i]
            );
        }
        out
    }

    /// Rebuilds a profile from its header and CSV text.
    pub fn from_parts(header: &ProfileHeader, csv: &str) -> Result<RadialProfile> {
        let o = &header.options;
        let grid = Grid1D::log_panels(o.r_min, o.r_max, o.panels, o.order)?;
        let mut lines = csv.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,U,V,dU,dV" => {}
            _ => {
                return Err(Error::Invalid(
                    "profile CSV must start with r,U,V,dU,dV".into(),
                ))
            }
        }
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Invalid(format!(
                    "profile CSV line {} has {} fields",
                    k + 2,
                    fields.len()
                )));
            }
            for (c, f) in cols.iter_mut().zip(fields) {
                c.push(f.trim().parse().map_err(|_| {
                    Error::Invalid(format!("bad number '{f}' on profile CSV line {}", k + 2))
                })?);
            }
        }
        if cols[0].len() != grid.len() {
            return Err(Error::Invalid(format!(
                "profile CSV has {} rows, the header's grid has {}",
                cols[0].len(),
                grid.len()
            )));
        }
        if cols[0]
            .iter()
            .zip(grid.nodes())
            .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs())
        {
            return Err(Error::Invalid(
                "profile CSV radii do not match the header's grid".into(),
            ));
        }
        let [_, u, v, du, dv] = cols;
        Ok(RadialProfile {
            exp: header.exponents,
            grid,
            u,
            v,
            du,
            dv,
            a: header.a,
            b: header.b,
            regime: header.exponents.regime(),
            s: header.s,
            s_bracket: header.s_bracket,
            r_max: header.r_max,
            r_trust: header.r_trust,
            matching_jump: header.matching_jump,
            tail: header.tail,
            options: header.options,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        crate::report::write_atomic(&dir.join(format!("{stem}.csv")), self.to_csv().as_bytes())?;
        let json = serde_json::to_string_pretty(&self.header())?;
        crate::report::write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<RadialProfile> {
        let header: ProfileHeader =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let csv = std::fs::read_to_string(dir.join(format!("{stem}.csv")))?;
        RadialProfile::from_parts(&header, &csv)
    }
}

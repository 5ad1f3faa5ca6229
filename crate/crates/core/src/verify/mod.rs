//! Executable checks of the claims the library reproduces.
//!
//! Every criterion produces a list of [`Claim`]s. A claim either carries a
//! tolerance (and then passes or fails) or reports a measured constant.

use serde::{Deserialize, Serialize};

use crate::error::Result;

mod examples;
mod flow;
mod smoothing;
mod torus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub anchor: String,
    pub status: Status,
    pub value: f64,
    pub detail: String,
}

impl Claim {
    pub fn check(anchor: &str, value: f64, ok: bool, detail: impl Into<String>) -> Self {
        Claim {
            anchor: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            detail: detail.into(),
        }
    }

    pub fn measured(anchor: &str, value: f64, detail: impl Into<String>) -> Self {
        Claim {
            anchor: anchor.into(),
            status: Status::Measured,
            value,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub claims: Vec<Claim>,
}

impl CriterionReport {
    fn new(id: u32, title: &str, claims: Vec<Claim>) -> Self {
        CriterionReport { id, title: title.into(), claims }
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&Claim> {
        self.claims.iter().filter(|c| c.status == Status::Fail).collect()
    }

    /// One line `criterion <id> <PASS|FAIL>: <title> (...)`.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let failed: Vec<&str> = self.failures().iter().map(|c| c.anchor.as_str()).collect();
        let tail = if failed.is_empty() {
            format!("{} claims", self.claims.len())
        } else {
            format!("failed: {}", failed.join(", "))
        };
        format!("criterion {:>2} {verdict}: {} ({tail})", self.id, self.title)
    }
}

/// Knobs shared by all criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    /// Seed of the random metric family.
    pub seed: u64,
    /// Number of random metrics in the oracle comparison.
    pub random_metrics: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { seed: 20240607, random_metrics: 20 }
    }
}

/// Identifiers of the criteria [`run_criterion`] knows.
pub const CRITERIA: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

pub fn run_criterion(id: u32, s: &VerifySettings) -> Result<CriterionReport> {
    let (title, claims) = match id {
        1 => ("curvature formulas agree with the coordinate oracle", examples::oracle_agreement(s)?),
        2 => ("cone sign table", examples::cone_signs()?),
        3 => ("positive-mass cone", examples::positive_mass_cone()?),
        4 => ("zero-area singularity", examples::zero_area()?),
        5 => ("glued Schwarzschild neck", examples::glued_neck()?),
        6 => ("variable-radius mollification", smoothing::mollification()?),
        7 => ("corner smoothing", smoothing::corner()?),
        8 => ("pulled-back h-flow solves Ricci flow", flow::consistency()?),
        9 => ("scalar lower bound along the flow", flow::lower_bound()?),
        10 => ("epsilon-uniform derivative monitors", flow::derivative_monitors()?),
        11 => ("mass along the flow", flow::mass_along_flow()?),
        12 => ("Yamabe functional on tori", torus::yamabe_checks()?),
        _ => return Err(crate::Error::Domain(format!("unknown criterion {id}"))),
    };
    Ok(CriterionReport::new(id, title, claims))
}

pub fn verify_all(s: &VerifySettings) -> Result<Vec<CriterionReport>> {
    CRITERIA.iter().map(|&id| run_criterion(id, s)).collect()
}

/// `[1.234e-5, ..]`.
pub(crate) fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

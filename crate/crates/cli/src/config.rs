//! Scenario configuration: JSON file, command-line overrides and defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use conelab::{RadialGrid, Result as CoreResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Curvature,
    Example,
    Mollify,
    Flow,
    Mass,
    Yamabe,
    VerifyAll,
}

/// The explicit singular examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    #[serde(rename = "2.2", alias = "positive-mass-cone")]
    PositiveMassCone,
    #[serde(rename = "2.3", alias = "zero-area")]
    ZeroArea,
    #[serde(rename = "2.5", alias = "glued-neck")]
    GluedNeck,
}

impl std::str::FromStr for Example {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| format!("unknown example '{s}' (use 2.2, 2.3 or 2.5)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    CellCentered,
    Geometric,
    SinhCore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKind,
    #[serde(default)]
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    /// Core width of a `sinh-core` grid.
    #[serde(default)]
    pub core: f64,
}

impl GridSpec {
    pub const fn new(kind: GridKind, r_min: f64, r_max: f64, nodes: usize) -> Self {
        GridSpec { kind, r_min, r_max, nodes, core: 0.0 }
    }

    pub fn build(&self) -> CoreResult<RadialGrid> {
        match self.kind {
            GridKind::Uniform => RadialGrid::uniform(self.r_min, self.r_max, self.nodes),
            GridKind::CellCentered => RadialGrid::cell_centered(self.r_max, self.nodes),
            GridKind::Geometric => RadialGrid::geometric(self.r_min, self.r_max, self.nodes),
            GridKind::SinhCore => RadialGrid::sinh_core(self.core, self.r_max, self.nodes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub t_final: f64,
    pub outputs: usize,
    /// Mollification scale of the background metric.
    pub background_eps: f64,
    /// Cone parameter of the flowed example.
    pub cone_eps: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec { t_final: 5e-4, outputs: 8, background_eps: 0.3, cone_eps: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusSpec {
    /// Amplitude of the wavy torus `a = 1 + amp/2 cos`, `b = (1 + amp sin)^2`.
    pub amp: f64,
    pub samples: usize,
    pub tol: f64,
    /// Exponent of the reported `||u||_q`.
    pub q: f64,
}

impl Default for TorusSpec {
    fn default() -> Self {
        TorusSpec { amp: 0.2, samples: 64, tol: 1e-9, q: 8.0 }
    }
}

/// Everything that determines the output of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub dim: usize,
    /// Radial grid; each scenario has its own default.
    pub grid: Option<GridSpec>,
    /// Mollification scales; each scenario has its own default.
    pub eps: Vec<f64>,
    pub example: Example,
    /// Cone opening and power for `curvature`.
    pub alpha: f64,
    pub beta: f64,
    /// Mass parameter of the zero-area and neck examples.
    pub m: f64,
    /// Inner and outer radius of the neck gluing.
    pub r0: f64,
    pub r1: f64,
    /// Sobolev exponent for `mollify`; `2n` when absent.
    pub p: Option<f64>,
    pub flow: FlowSpec,
    pub torus: TorusSpec,
    pub seed: u64,
    /// Size of the random metric family in `verify-all`.
    pub random_metrics: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: None,
            dim: 3,
            grid: None,
            eps: vec![],
            example: Example::PositiveMassCone,
            alpha: 0.5,
            beta: 1.0,
            m: 1.0,
            r0: 3.0,
            r1: 6.0,
            p: None,
            flow: FlowSpec::default(),
            torus: TorusSpec::default(),
            seed: 20240607,
            random_metrics: 20,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.dim < 3 {
            return Err(format!("dim = {} must be at least 3", self.dim));
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) {
            return Err("every eps must be positive".into());
        }
        if let Some(g) = &self.grid {
            if g.nodes == 0 || !(g.r_max > g.r_min) {
                return Err("grid needs nodes > 0 and r_max > r_min".into());
            }
        }
        if !(self.flow.t_final > 0.0) || self.flow.outputs == 0 {
            return Err("flow needs t_final > 0 and at least one output".into());
        }
        if self.torus.samples < 4 || !(self.torus.tol > 0.0) {
            return Err("torus needs at least 4 samples and tol > 0".into());
        }
        Ok(())
    }

    pub fn grid_or(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }

    pub fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        if self.eps.is_empty() {
            default.to_vec()
        } else {
            self.eps.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash() {
        let c = ScenarioConfig { scenario: Some(Scenario::Flow), eps: vec![0.1], ..Default::default() };
        let text = serde_json::to_string(&c).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(ScenarioConfig::default().hash(), c.hash());
    }

    #[test]
    fn partial_config_takes_defaults() {
        let c: ScenarioConfig = serde_json::from_str(r#"{"scenario": "example", "example": "2.3", "m": 0.5}"#).unwrap();
        assert_eq!(c.example, Example::ZeroArea);
        assert_eq!(c.dim, 3);
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"bogus": 1}"#).is_err());
        assert_eq!("2.5".parse::<Example>().unwrap(), Example::GluedNeck);
        assert!("7".parse::<Example>().is_err());
    }
}

//! Scenario configuration, parsed from JSON.

use crate::error::{EpwError, Result};
use crate::sampling::Strategy;
use crate::solver::{DEFAULT_EPSILON, DEFAULT_OVERSAMPLE};
use crate::sphquad::{Geometry, Spacing};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// A single set size or a list of sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    One(usize),
    Many(Vec<usize>),
}

impl PSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            PSpec::One(p) => vec![*p],
            PSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Target {
    /// Spherical wave `b_l^m`, given as `[l, m]`.
    Mode([i64; 2]),
    /// Random element of `B_L`.
    Surrogate {},
    /// Fundamental solution centred at `source`.
    Fundamental { source: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(rename = "L", default)]
    pub l: Option<usize>,
    #[serde(rename = "P", default)]
    pub p: Option<PSpec>,
    /// Evanescent sampling strategy; absent means a propagative set.
    #[serde(default)]
    pub strategy: Option<Strategy>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_oversample")]
    pub oversample: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default)]
    pub target: Option<Target>,
    #[serde(default)]
    pub ell_max: Option<usize>,
    #[serde(default)]
    pub points_file: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_oversample() -> f64 {
    DEFAULT_OVERSAMPLE
}

fn default_geometry() -> Geometry {
    Geometry::Sphere
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            kappa: None,
            l: None,
            p: None,
            strategy: None,
            epsilon: DEFAULT_EPSILON,
            oversample: DEFAULT_OVERSAMPLE,
            seed: 0,
            geometry: Geometry::Sphere,
            spacing: Spacing::Equispaced,
            target: None,
            ell_max: None,
            points_file: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| EpwError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(EpwError::Config(format!("kappa must be positive, got {k}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(EpwError::Config(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.oversample > 0.0 && self.oversample.is_finite()) {
            return Err(EpwError::Config(format!("oversample must be positive, got {}", self.oversample)));
        }
        if let Some(p) = &self.p {
            let v = p.values();
            if v.is_empty() || v.contains(&0) {
                return Err(EpwError::Config("P values must be positive".into()));
            }
        }
        if let Some(Target::Mode([l, m])) = self.target {
            if l < 0 || m.abs() > l {
                return Err(EpwError::Config(format!("invalid mode [{l}, {m}]")));
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> Result<f64> {
        self.kappa.ok_or_else(|| EpwError::Config("missing key kappa".into()))
    }

    pub fn l(&self) -> Result<usize> {
        self.l.ok_or_else(|| EpwError::Config("missing key L".into()))
    }

    pub fn p_values(&self) -> Result<Vec<usize>> {
        self.p.as_ref().map(PSpec::values).ok_or_else(|| EpwError::Config("missing key P".into()))
    }
}

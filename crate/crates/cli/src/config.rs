//! Run configurations, one JSON document per command.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use pluripot::balanced::BalancedOptions;
use pluripot::measures::MeasureSpec;
use pluripot::solver::SolveOptions;
use pluripot::ModelSpec;

use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveMaConfig {
    pub model: ModelSpec,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Start from a seeded random potential instead of the reference.
    #[serde(default)]
    pub random_init: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalancedConfig {
    pub model: ModelSpec,
    /// `mu` or `minus`.
    pub setting: String,
    /// Required for `mu`.
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    pub ks: Vec<u32>,
    #[serde(default)]
    pub options: BalancedOptions,
    /// Options of the limit solve.
    #[serde(default)]
    pub solver: SolveOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    /// `|z| <= radius`.
    Disk { radius: f64 },
    /// `a <= log|z|^2 <= b`.
    Annulus { a: f64, b: f64 },
    /// Every node of the window.
    Window,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub model: ModelSpec,
    pub sets: Vec<SetSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogEnergyConfig {
    pub model: ModelSpec,
    pub measure: MeasureSpec,
    /// Use `mu - omega` instead of `mu`.
    #[serde(default)]
    pub minus_reference: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_report_models")]
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
}

fn default_report_models() -> Vec<ModelSpec> {
    vec![ModelSpec::new(1, 1, 20.0, 2048), ModelSpec::new(2, 1, 20.0, 32)]
}

fn default_pairs() -> usize {
    50
}

/// Parses `text` as a `T`, rejecting unknown keys.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))
}

impl BalancedConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.ks.is_empty() {
            return Err(Failure::Config("ks must not be empty".into()));
        }
        if self.ks[0] == 0 || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Failure::Config("ks must be positive and strictly ascending".into()));
        }
        self.options.validate()?;
        self.solver.validate()?;
        Ok(())
    }
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.sets.is_empty() {
            return Err(Failure::Config("sets must not be empty".into()));
        }
        for s in &self.sets {
            match *s {
                SetSpec::Disk { radius } if !(radius > 0.0 && radius.is_finite()) => {
                    return Err(Failure::Config(format!("disk radius {radius} must be positive")));
                }
                SetSpec::Annulus { a, b } if !(a < b) => {
                    return Err(Failure::Config(format!("annulus needs a < b, got [{a}, {b}]")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl ReportConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.models.is_empty() || self.pairs == 0 {
            return Err(Failure::Config("report needs at least one model and one pair".into()));
        }
        Ok(())
    }
}

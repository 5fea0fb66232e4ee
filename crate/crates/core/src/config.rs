//! Planner configuration file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ethics::{EthicsConfig, Profile};
use crate::frenet::SamplingConfig;
use crate::prediction::PredictionParams;
use crate::responsibility::ResponsibilityParams;
use crate::risk::HarmModel;

/// Every tunable of the planner. Missing sections take their defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub sampling: SamplingConfig,
    pub prediction: PredictionParams,
    pub harm: HarmModel,
    pub responsibility: ResponsibilityParams,
    pub ethics: EthicsConfig,
}

impl PlannerConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PlannerConfig = serde_json::from_str(text).map_err(Error::from_json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        self.prediction.validate()?;
        self.harm.validate()?;
        self.responsibility.validate()?;
        self.ethics.validate()
    }

    /// The same configuration under another profile; nothing else changes.
    pub fn with_profile(&self, profile: Profile) -> Self {
        let mut out = self.clone();
        out.ethics.profile = profile;
        out
    }
}

//! Pipeline configuration file (TOML).
//!
//! ```toml
//! method = "rkga2optlk"
//! seed = 7
//! cost_lift = 30.0
//! home = { x = 0.0, y = 0.0 }
//!
//! [fdog]
//! tau = 0.3
//!
//! [ga]
//! population_size = 100
//! ```
//!
//! Missing keys take their defaults; unknown keys are an error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::FdogParams;
use crate::gtsp::Point;
use crate::solver::{GaConfig, Method};
use crate::trace::TraceParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Binarization threshold for grayscale inputs to `trace`.
    pub threshold: f64,
    pub home: Point,
    pub cost_lift: f64,
    pub method: Method,
    pub seed: u64,
    pub fdog: FdogParams,
    pub trace: TraceParams,
    pub ga: GaConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            home: Point::default(),
            cost_lift: 30.0,
            method: Method::Rkga2OptLk,
            seed: 0,
            fdog: FdogParams::default(),
            trace: TraceParams::default(),
            ga: GaConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: String| ConfigError::Invalid(e);
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(invalid(format!("threshold must be in [0, 1], got {}", self.threshold)));
        }
        if !(self.cost_lift.is_finite() && self.cost_lift >= 0.0) {
            return Err(invalid(format!("cost_lift must be non-negative, got {}", self.cost_lift)));
        }
        if !(self.home.x.is_finite() && self.home.y.is_finite()) {
            return Err(invalid("home must be finite".into()));
        }
        self.fdog.validate().map_err(|e| invalid(e.to_string()))?;
        self.ga.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    /// GA settings with the run seed filled in.
    pub fn ga_with_seed(&self) -> GaConfig {
        GaConfig {
            seed: self.seed,
            ..self.ga.clone()
        }
    }
}

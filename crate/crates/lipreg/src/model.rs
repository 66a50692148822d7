//! Versioned TOML model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::MetricKind;

pub const MODEL_VERSION: u32 = 1;

/// One sample of a fitted model. `coords` holds the point's coordinates, or
/// its row of the distance matrix for the matrix metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub id: String,
    pub value: f64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub q: u32,
    pub eta: f64,
    pub delta_conf: f64,
    pub lipschitz: f64,
    pub penalty: f64,
    pub stratum: u64,
    pub empirical_risk: f64,
    pub risk_bound: f64,
    pub ddim: f64,
    pub metric: String,
    /// Factor applied to raw distances during fitting.
    pub scale: f64,
    pub spanner_delta: f64,
    /// Seconds since the Unix epoch.
    pub fitted_at: u64,
    pub points: Vec<ModelPoint>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

impl ModelFile {
    pub fn metric_kind(&self) -> AppResult<MetricKind> {
        self.metric.parse().map_err(|m: String| AppError::Usage(m))
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model fields are all representable in TOML")
    }

    /// Parses a model, rejecting other format versions before reading any
    /// other field.
    pub fn from_toml(text: &str) -> Result<ModelFile, String> {
        let probe: VersionProbe = toml::from_str(text).map_err(|e| e.to_string())?;
        match probe.version {
            Some(MODEL_VERSION) => {}
            Some(v) => return Err(format!("model format version {v} is not supported (expected {MODEL_VERSION})")),
            None => return Err("model file has no version field".into()),
        }
        let model: ModelFile = toml::from_str(text).map_err(|e| e.to_string())?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), String> {
        if !matches!(self.q, 1 | 2) {
            return Err(format!("q = {} (expected 1 or 2)", self.q));
        }
        let kind: MetricKind = self.metric.parse()?;
        if self.points.is_empty() {
            return Err("model has no points".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(format!("scale {} is not positive", self.scale));
        }
        let width = match kind {
            MetricKind::Matrix => self.points.len(),
            _ => self.points[0].coords.len(),
        };
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.value) {
                return Err(format!("point `{}` has value {} outside [0, 1]", p.id, p.value));
            }
            if p.coords.len() != width {
                return Err(format!("point `{}` has {} coordinates, expected {width}", p.id, p.coords.len()));
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> AppResult<ModelFile> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        ModelFile::from_toml(&text).map_err(|m| AppError::file(path, m))
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| AppError::io(path, e))
    }
}

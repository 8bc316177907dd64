//! Pipeline configuration: one JSON file plus `--set key=value` overrides.

use std::path::Path;

use graspgen_core::codec::DEFAULT_CLASSES;
use graspgen_core::eval::{evaluator_by_name, EvalParams};
use graspgen_core::gripper::{GripperDims, GripperModel};
use graspgen_core::losses::LossWeights;
use graspgen_core::refine::RefineParams;
use graspgen_core::sampler::SamplerParams;
use graspgen_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub beta: f64,
    pub weights: LossWeights,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            weights: LossWeights::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Required; there is no implicit entropy anywhere in the pipeline.
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub worker_count: usize,
    #[serde(default = "default_evaluator")]
    pub evaluator: String,
    #[serde(default = "default_classes")]
    pub direction_classes: usize,
    #[serde(default)]
    pub sampler: SamplerParams,
    #[serde(default)]
    pub eval: EvalParams,
    #[serde(default)]
    pub refine: RefineParams,
    #[serde(default)]
    pub gripper: GripperDims,
    #[serde(default)]
    pub losses: LossConfig,
}

fn default_workers() -> usize {
    1
}

fn default_evaluator() -> String {
    "quasi-static".into()
}

fn default_classes() -> usize {
    DEFAULT_CLASSES
}

impl PipelineConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            worker_count: default_workers(),
            evaluator: default_evaluator(),
            direction_classes: default_classes(),
            sampler: SamplerParams::default(),
            eval: EvalParams::default(),
            refine: RefineParams::default(),
            gripper: GripperDims::default(),
            losses: LossConfig::default(),
        }
    }

    /// Reads, applies overrides, deserializes and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(value)
            .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.worker_count < 1 {
            return Err(Error::Config("worker_count: must be at least 1".into()));
        }
        if self.direction_classes < 2 {
            return Err(Error::Config("direction_classes: must be at least 2".into()));
        }
        self.sampler.validate()?;
        self.eval.validate()?;
        self.refine.validate()?;
        self.gripper_model()?;
        if self.losses.beta.is_nan() || self.losses.beta <= 0.0 {
            return Err(Error::Config("losses.beta: must be positive".into()));
        }
        self.losses
            .weights
            .validate()
            .map_err(|e| Error::Config(format!("losses.weights: {e}")))?;
        evaluator_by_name(&self.evaluator, &self.eval, self.seed)?;
        Ok(())
    }

    pub fn gripper_model(&self) -> Result<GripperModel> {
        GripperModel::from_dims(&self.gripper).map_err(|e| Error::Config(format!("gripper: {e}")))
    }
}

/// Sets a dotted path such as `sampler.num_fps_points=30`. The value is
/// parsed as JSON when possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::Config(format!("override `{assignment}` has an empty key segment")));
        }
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is inside a non-object")))?;
        if parts.peek().is_none() {
            map.insert(part.to_owned(), value);
            return Ok(());
        }
        node = map
            .entry(part)
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seed_is_required() {
        let err = PipelineConfig::from_value(json!({})).unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.contains("seed")));
        let cfg = PipelineConfig::from_value(json!({"seed": 7})).unwrap();
        assert_eq!(cfg, PipelineConfig::with_seed(7));
    }

    #[test]
    fn error_names_field_path() {
        let err = PipelineConfig::from_value(json!({"seed": 1, "sampler": {"num_fps_points": "many"}})).unwrap_err();
        assert!(err.to_string().contains("sampler.num_fps_points"), "{err}");
        let err = PipelineConfig::from_value(json!({"seed": 1, "eval": {"frictoin_mu": 1.0}})).unwrap_err();
        assert!(err.to_string().contains("eval"), "{err}");
    }

    #[test]
    fn invariants_checked() {
        assert!(PipelineConfig::from_value(json!({"seed": 1, "worker_count": 0})).is_err());
        assert!(PipelineConfig::from_value(json!({"seed": 1, "refine": {"top_percent": 0.0}})).is_err());
        assert!(PipelineConfig::from_value(json!({"seed": 1, "evaluator": "physx"})).is_err());
        assert!(PipelineConfig::from_value(json!({"seed": 1, "gripper": {"max_opening": -1.0}})).is_err());
    }

    #[test]
    fn overrides() {
        let mut v = json!({"seed": 1, "sampler": {"num_fps_points": 50}});
        apply_override(&mut v, "sampler.num_fps_points=12").unwrap();
        apply_override(&mut v, "eval.friction_mu=0.8").unwrap();
        apply_override(&mut v, "evaluator=quasi-static").unwrap();
        apply_override(&mut v, "seed=18446744073709551615").unwrap();
        let cfg = PipelineConfig::from_value(v).unwrap();
        assert_eq!(cfg.sampler.num_fps_points, 12);
        assert_eq!(cfg.eval.friction_mu, 0.8);
        assert_eq!(cfg.seed, u64::MAX);

        let mut v = json!({"seed": 1});
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "seed.x=1").is_err());
    }
}

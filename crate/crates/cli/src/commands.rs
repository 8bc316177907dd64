//! Pipeline stages as file-to-file operations.

use std::path::Path;

use graspgen_core::codec::DirectionLattice;
use graspgen_core::eval::evaluator_by_name;
use graspgen_core::geometry::io::{read_point_cloud, write_marker_ply, write_point_cloud};
use graspgen_core::geometry::{PointCloud, Scene};
use graspgen_core::losses::{bce_with_logits, smooth_l1, total_loss};
use graspgen_core::refine::{self, average_precision, GraspInput, Outcome, RefinedGrasp};
use graspgen_core::sampler::{generate_candidates, sample_object_surface, GraspCandidate};
use graspgen_core::scores::{read_jsonl, read_label_records, write_jsonl, write_label_records, LabelRecord};
use graspgen_core::{Error, Result};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

/// Candidates per scene object, in scene order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSummary {
    pub counts: Vec<(u32, usize)>,
}

impl SampleSummary {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|(_, n)| n).sum()
    }
}

/// Surface samples of every object, labelled by instance.
pub fn scene_cloud(scene: &Scene, cfg: &PipelineConfig) -> Result<PointCloud> {
    let parts = scene
        .objects()
        .iter()
        .map(|o| sample_object_surface(o, &cfg.sampler, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointCloud::concat(&parts))
}

pub fn sample(scene_path: &Path, cfg: &PipelineConfig, out: &Path, cloud_out: Option<&Path>) -> Result<SampleSummary> {
    let scene = Scene::load(scene_path)?;
    let gripper = cfg.gripper_model()?;
    let mut all = Vec::new();
    let mut counts = Vec::new();
    for obj in scene.objects() {
        let cands = generate_candidates(&scene, obj.instance_id, &gripper, &cfg.sampler, cfg.seed)?;
        info!("instance {}: {} candidates", obj.instance_id, cands.len());
        counts.push((obj.instance_id, cands.len()));
        all.extend(cands);
    }
    write_jsonl(out, &all)?;
    if let Some(path) = cloud_out {
        write_point_cloud(path, &scene_cloud(&scene, cfg)?)?;
    }
    Ok(SampleSummary { counts })
}

/// Fills in `sim_score` for every candidate. Returns the number scored 1.
pub fn annotate(candidates: &Path, scene_path: &Path, cfg: &PipelineConfig, out: &Path) -> Result<usize> {
    let scene = Scene::load(scene_path)?;
    let gripper = cfg.gripper_model()?;
    let evaluator = evaluator_by_name(&cfg.evaluator, &cfg.eval, cfg.seed)?;
    let mut cands: Vec<GraspCandidate> = read_jsonl(candidates)?;
    for (i, c) in cands.iter().enumerate() {
        c.validate()
            .map_err(|e| Error::invariant(format!("candidate {i}: {e}")))?;
    }
    let scores = cands
        .par_iter()
        .map(|c| evaluator.evaluate(c, &scene, &gripper))
        .collect::<Result<Vec<u8>>>()?;
    for (c, s) in cands.iter_mut().zip(&scores) {
        c.sim_score = Some(*s);
    }
    write_jsonl(out, &cands)?;
    Ok(scores.iter().filter(|s| **s == 1).count())
}

pub fn aggregate(evaluated: &Path, cloud: &Path, out: &Path, scene_id: &str, classes: usize) -> Result<LabelRecord> {
    // Only checked for readability; the record stores the reference.
    read_point_cloud(cloud)?;
    let cands: Vec<GraspCandidate> = read_jsonl(evaluated)?;
    let lattice = DirectionLattice::build(classes)?;
    let record = LabelRecord::assemble(scene_id, &cloud.to_string_lossy(), &cands, &lattice)?;
    write_label_records(out, std::slice::from_ref(&record))?;
    Ok(record)
}

pub fn refine(
    grasps: &Path,
    cloud: &Path,
    cfg: &PipelineConfig,
    out: &Path,
    markers: Option<&Path>,
) -> Result<Vec<RefinedGrasp>> {
    let inputs: Vec<GraspInput> = read_jsonl(grasps)?;
    let cloud = read_point_cloud(cloud)?;
    if cloud.instance_labels.is_none() {
        return Err(Error::format("point cloud has no instance_id property"));
    }
    let gripper = cfg.gripper_model()?;
    let kept = refine::refine(&inputs, &cloud, &gripper, &cfg.refine)?;
    write_jsonl(out, &kept)?;
    if let Some(path) = markers {
        let points: Vec<_> = kept.iter().map(|g| *g.pose.translation()).collect();
        let labels: Vec<_> = kept.iter().map(|g| g.instance_id).collect();
        write_marker_ply(path, &points, &labels)?;
    }
    Ok(kept)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub ap: f64,
    pub successes: usize,
    pub total: usize,
}

pub fn eval_ap(outcomes: &Path, out: Option<&Path>) -> Result<ApReport> {
    let outcomes: Vec<Outcome> = read_jsonl(outcomes)?;
    let report = ApReport {
        ap: average_precision(&outcomes)?,
        successes: outcomes.iter().filter(|o| o.success).count(),
        total: outcomes.len(),
    };
    if let Some(path) = out {
        write_jsonl(path, std::slice::from_ref(&report))?;
    }
    Ok(report)
}

pub fn lattice(classes: usize, out: &Path) -> Result<()> {
    let lattice = DirectionLattice::build(classes)?;
    let points: Vec<_> = lattice.vectors().iter().map(|v| v.into_inner()).collect();
    let labels: Vec<u32> = (0..points.len() as u32).collect();
    write_marker_ply(out, &points, &labels)
}

/// Network outputs for one scene, aligned with its label record:
/// one affordance per group, `groups x classes` direction logits (row-major)
/// and one grasp logit per candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub scene_id: String,
    pub affordance: Vec<f64>,
    pub direction_logits: Vec<f64>,
    pub grasp_logits: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub scene_id: String,
    pub l_aff: f64,
    pub l_dir: f64,
    pub l_score: f64,
    pub total: f64,
}

/// Dense direction targets: normalized ADS where populated, 0 elsewhere.
pub fn direction_targets(record: &LabelRecord, classes: usize) -> Result<Vec<f64>> {
    let mut t = vec![0.0; record.groups.len() * classes];
    for a in &record.ads {
        if a.v >= classes || a.k >= record.groups.len() {
            return Err(Error::invariant(format!("ADS cell ({}, {}) out of range", a.k, a.v)));
        }
        t[a.k * classes + a.v] = a.norm;
    }
    Ok(t)
}

pub fn scene_losses(record: &LabelRecord, pred: &Prediction, cfg: &PipelineConfig) -> Result<LossReport> {
    let gcs: Vec<f64> = record.groups.iter().map(|g| g.gcs).collect();
    let igs: Vec<f64> = record.candidates.iter().map(|c| c.igs).collect();
    let dirs = direction_targets(record, cfg.direction_classes)?;
    let ctx = |what: &str, e: Error| Error::invalid(format!("scene {} {what}: {e}", record.scene_id));
    let l_aff = smooth_l1(&pred.affordance, &gcs, cfg.losses.beta).map_err(|e| ctx("affordance", e))?;
    let l_dir = bce_with_logits(&pred.direction_logits, &dirs).map_err(|e| ctx("directions", e))?;
    let l_score = bce_with_logits(&pred.grasp_logits, &igs).map_err(|e| ctx("grasp scores", e))?;
    Ok(LossReport {
        scene_id: record.scene_id.clone(),
        l_aff,
        l_dir,
        l_score,
        total: total_loss(l_aff, l_dir, l_score, &cfg.losses.weights)?,
    })
}

/// Per-scene losses of predictions against label records, matched by scene id.
pub fn losses(labels: &Path, predictions: &Path, cfg: &PipelineConfig, out: &Path) -> Result<Vec<LossReport>> {
    let records = read_label_records(labels)?;
    let preds: Vec<Prediction> = read_jsonl(predictions)?;
    let reports = records
        .iter()
        .map(|r| {
            let p = preds
                .iter()
                .find(|p| p.scene_id == r.scene_id)
                .ok_or_else(|| Error::NotFound(format!("no prediction for scene {}", r.scene_id)))?;
            scene_losses(r, p, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(out, &reports)?;
    Ok(reports)
}

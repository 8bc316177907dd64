//! Post-processing of predicted grasps against a labelled point cloud:
//! instance assignment, cloud collision filtering, pose NMS and top-percent
//! selection, plus the success-ratio metric.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{points_in_box, PointCloud, RigidTransform};
use crate::gripper::GripperModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineParams {
    pub nms_translation: f64,
    pub nms_angle: f64,
    pub top_percent: f64,
    pub collision_dilation: f64,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            nms_translation: 0.02,
            nms_angle: std::f64::consts::FRAC_PI_6,
            top_percent: 10.0,
            collision_dilation: 0.005,
        }
    }
}

impl RefineParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("refine.{field}: {msg}")));
        if !(self.nms_translation > 0.0 && self.nms_translation.is_finite()) {
            return bad("nms_translation", format!("must be positive, got {}", self.nms_translation));
        }
        if !(self.nms_angle > 0.0 && self.nms_angle.is_finite()) {
            return bad("nms_angle", format!("must be positive, got {}", self.nms_angle));
        }
        if !(self.top_percent > 0.0 && self.top_percent <= 100.0) {
            return bad("top_percent", format!("must be in (0, 100], got {}", self.top_percent));
        }
        if !(self.collision_dilation >= 0.0 && self.collision_dilation.is_finite()) {
            return bad(
                "collision_dilation",
                format!("must be non-negative, got {}", self.collision_dilation),
            );
        }
        Ok(())
    }
}

/// One input line. Extra fields are ignored so evaluated candidate files can
/// be fed directly; without an explicit confidence, `sim_score *
/// collision_score` is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspInput {
    pub pose: RigidTransform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision_score: Option<f64>,
}

impl GraspInput {
    pub fn new(pose: RigidTransform, confidence: f64) -> Self {
        Self {
            pose,
            confidence: Some(confidence),
            sim_score: None,
            collision_score: None,
        }
    }

    pub fn resolved_confidence(&self) -> Result<f64> {
        let c = match (self.confidence, self.sim_score, self.collision_score) {
            (Some(c), _, _) => c,
            (None, Some(s), Some(q)) => f64::from(s) * q,
            _ => return Err(Error::format("grasp has no confidence")),
        };
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::invalid(format!("confidence {c} outside [0, 1]")));
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinedGrasp {
    pub pose: RigidTransform,
    pub confidence: f64,
    pub instance_id: u32,
    /// Index of the grasp in the input list.
    pub source: usize,
}

/// Majority instance label among the cloud points inside each grasp's
/// closing region; ties go to the lower id. Grasps with an empty region are
/// dropped. Output keeps input order.
pub fn assign_instances(grasps: &[GraspInput], cloud: &PointCloud, gripper: &GripperModel) -> Result<Vec<RefinedGrasp>> {
    let labels = cloud
        .instance_labels
        .as_ref()
        .ok_or_else(|| Error::invalid("point cloud has no instance labels"))?;
    let confidences = grasps
        .iter()
        .map(GraspInput::resolved_confidence)
        .collect::<Result<Vec<_>>>()?;
    Ok(grasps
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let region = gripper.closing_region_at(&g.pose);
            let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
            for p in points_in_box(&region, cloud) {
                *votes.entry(labels[p]).or_default() += 1;
            }
            // BTreeMap iterates ascending, so the first maximum is the lowest id.
            let best = votes.iter().fold(None, |acc: Option<(u32, usize)>, (&id, &n)| match acc {
                Some((_, m)) if m >= n => acc,
                _ => Some((id, n)),
            })?;
            Some(RefinedGrasp {
                pose: g.pose,
                confidence: confidences[i],
                instance_id: best.0,
                source: i,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

/// True when no cloud point lies inside any gripper body box grown by
/// `dilation`.
pub fn collision_filter(pose: &RigidTransform, cloud: &PointCloud, gripper: &GripperModel, dilation: f64) -> bool {
    let boxes = gripper.body_boxes_at(pose).map(|b| b.dilated(dilation));
    !cloud.points.iter().any(|p| boxes.iter().any(|b| b.contains(p)))
}

fn approach_angle(a: &RigidTransform, b: &RigidTransform) -> f64 {
    a.axis(2).dot(&b.axis(2)).clamp(-1.0, 1.0).acos()
}

fn by_confidence(grasps: &[RefinedGrasp]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grasps.len()).collect();
    order.sort_by(|&i, &j| {
        grasps[j]
            .confidence
            .total_cmp(&grasps[i].confidence)
            .then(grasps[i].source.cmp(&grasps[j].source))
    });
    order
}

/// Greedy suppression in confidence order. A grasp is dropped when a kept
/// grasp on the same instance is both closer than `nms_translation` and
/// within `nms_angle` in approach direction.
pub fn nms(grasps: &[RefinedGrasp], params: &RefineParams) -> Vec<RefinedGrasp> {
    let mut kept: Vec<RefinedGrasp> = Vec::new();
    for i in by_confidence(grasps) {
        let g = &grasps[i];
        let suppressed = kept.iter().any(|k| {
            k.instance_id == g.instance_id
                && (k.pose.translation() - g.pose.translation()).norm() < params.nms_translation
                && approach_angle(&k.pose, &g.pose) < params.nms_angle
        });
        if !suppressed {
            kept.push(g.clone());
        }
    }
    kept
}

/// The `ceil(p/100 * n)` most confident grasps, most confident first.
pub fn top_percent(grasps: &[RefinedGrasp], p: f64) -> Vec<RefinedGrasp> {
    let n = grasps.len();
    if n == 0 {
        return Vec::new();
    }
    // The small offset keeps exact products like 10% of 30 from rounding up.
    let take = ((p / 100.0 * n as f64 - 1e-9).ceil().max(1.0) as usize).min(n);
    by_confidence(grasps)
        .into_iter()
        .take(take)
        .map(|i| grasps[i].clone())
        .collect()
}

/// Full refinement: assignment, collision filter, NMS, top-percent.
pub fn refine(
    grasps: &[GraspInput],
    cloud: &PointCloud,
    gripper: &GripperModel,
    params: &RefineParams,
) -> Result<Vec<RefinedGrasp>> {
    params.validate()?;
    let assigned = assign_instances(grasps, cloud, gripper)?;
    let keep: Vec<bool> = assigned
        .par_iter()
        .map(|g| collision_filter(&g.pose, cloud, gripper, params.collision_dilation))
        .collect();
    let free: Vec<RefinedGrasp> = assigned
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| k.then_some(g))
        .collect();
    Ok(top_percent(&nms(&free, params), params.top_percent))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
}

/// Successes over total attempts.
pub fn average_precision(outcomes: &[Outcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::invalid("no outcomes"));
    }
    let hits = outcomes.iter().filter(|o| o.success).count();
    Ok(hits as f64 / outcomes.len() as f64)
}

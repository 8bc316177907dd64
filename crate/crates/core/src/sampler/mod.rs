//! Collision-gated grasp candidate generation.
//!
//! Per object: sample the surface, estimate normals, pick FPS centers, spread
//! approach directions over a cone around each inward normal, keep directions
//! with a clear retreat corridor, then sweep the in-plane angle and standoff
//! grid and keep poses that pass the box overlap gate.

mod fps;
mod gate;
mod normals;

pub use fps::farthest_point_sample;
pub use gate::{approach_clear, cone_directions, overlap_gate, GateResult};
pub use normals::{estimate_normals, pca_normals};

pub(crate) use gate::body_overlap;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::compose_grasp_pose;
use crate::error::{Error, Result};
use crate::geometry::overlap::{splitmix64, MIN_OVERLAP_SAMPLES};
use crate::geometry::{PointCloud, RigidTransform, Scene, SceneObject, UnitVec3, Vec3};
use crate::gripper::GripperModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerParams {
    pub num_fps_points: usize,
    pub normal_k: usize,
    /// Cone angles in radians, each in `[0, π/2)`.
    pub alpha_levels: Vec<f64>,
    pub azimuth_steps: usize,
    /// In-plane angles in radians.
    pub inplane_angles: Vec<f64>,
    /// Standoff depths in meters.
    pub standoffs: Vec<f64>,
    pub iou_pass_threshold: f64,
    /// Largest tolerated body-box overlap, m³.
    pub body_clearance_epsilon: f64,
    /// Corridor length beyond the standoff checked by the approach rays, m.
    pub approach_ray_margin: f64,
    /// Monte-Carlo samples per box overlap estimate.
    pub overlap_samples: usize,
    /// Surface points drawn per object before FPS.
    pub surface_points: usize,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            num_fps_points: 50,
            normal_k: 16,
            alpha_levels: vec![0.0, FRAC_PI_6, FRAC_PI_3],
            azimuth_steps: 6,
            inplane_angles: (0..12).map(|i| PI * i as f64 / 12.0).collect(),
            standoffs: vec![0.01, 0.02, 0.03, 0.04],
            iou_pass_threshold: 0.05,
            body_clearance_epsilon: 1e-8,
            approach_ray_margin: 0.10,
            overlap_samples: 1024,
            surface_points: 1024,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("sampler.{m}")));
        if self.num_fps_points == 0 {
            return bad("num_fps_points must be at least 1".into());
        }
        if self.normal_k < 3 {
            return bad(format!("normal_k must be at least 3, got {}", self.normal_k));
        }
        if self.alpha_levels.is_empty() {
            return bad("alpha_levels must not be empty".into());
        }
        if let Some(a) = self.alpha_levels.iter().find(|a| !(0.0..FRAC_PI_2).contains(*a)) {
            return bad(format!("alpha_levels entry {a} outside [0, π/2)"));
        }
        if self.azimuth_steps == 0 && self.alpha_levels.iter().any(|a| *a > 0.0) {
            return bad("azimuth_steps must be positive when a cone angle is nonzero".into());
        }
        if self.inplane_angles.is_empty() {
            return bad("inplane_angles must not be empty".into());
        }
        if let Some(a) = self.inplane_angles.iter().find(|a| !(0.0..2.0 * PI).contains(*a)) {
            return bad(format!("inplane_angles entry {a} outside [0, 2π)"));
        }
        if self.standoffs.is_empty() {
            return bad("standoffs must not be empty".into());
        }
        if let Some(d) = self.standoffs.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return bad(format!("standoffs entry {d} must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.iou_pass_threshold) {
            return bad(format!("iou_pass_threshold {} outside [0, 1]", self.iou_pass_threshold));
        }
        if !(self.body_clearance_epsilon >= 0.0) {
            return bad("body_clearance_epsilon must be non-negative".into());
        }
        if !(self.approach_ray_margin >= 0.0) {
            return bad("approach_ray_margin must be non-negative".into());
        }
        if self.overlap_samples < MIN_OVERLAP_SAMPLES {
            return bad(format!("overlap_samples must be at least {MIN_OVERLAP_SAMPLES}"));
        }
        if self.surface_points < self.num_fps_points.max(self.normal_k) {
            return bad("surface_points must cover num_fps_points and normal_k".into());
        }
        Ok(())
    }

    pub fn max_standoff(&self) -> f64 {
        self.standoffs.iter().copied().fold(0.0, f64::max)
    }
}

/// One sampled gripper pose with its gate and evaluation scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub instance_id: u32,
    pub center: Vec3,
    pub approach: UnitVec3,
    pub inplane_angle: f64,
    pub depth: f64,
    pub pose: RigidTransform,
    pub collision_score: f64,
    #[serde(default)]
    pub sim_score: Option<u8>,
}

impl GraspCandidate {
    pub fn new(
        instance_id: u32,
        center: Vec3,
        approach: UnitVec3,
        inplane_angle: f64,
        depth: f64,
    ) -> Result<Self> {
        let pose = compose_grasp_pose(&center, &approach, inplane_angle, depth)?;
        Ok(Self {
            instance_id,
            center,
            approach,
            inplane_angle,
            depth,
            pose,
            collision_score: 0.0,
            sim_score: None,
        })
    }

    /// Checks the stored pose against a fresh composition and the score ranges.
    pub fn validate(&self) -> Result<()> {
        if (self.approach.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invariant("candidate approach is not unit length"));
        }
        let fresh = compose_grasp_pose(&self.center, &self.approach, self.inplane_angle, self.depth)?;
        let dr = (fresh.rotation() - self.pose.rotation()).abs().max();
        let dt = (fresh.translation() - self.pose.translation()).abs().max();
        if dr > 1e-9 || dt > 1e-9 {
            return Err(Error::invariant("candidate pose does not match its parameters"));
        }
        if !(0.0..=1.0).contains(&self.collision_score) {
            return Err(Error::invariant("collision score outside [0, 1]"));
        }
        if matches!(self.sim_score, Some(s) if s > 1) {
            return Err(Error::invariant("sim score must be 0 or 1"));
        }
        Ok(())
    }
}

fn object_seed(seed: u64, instance_id: u32) -> u64 {
    splitmix64(seed ^ (u64::from(instance_id) << 32 | 0x5eed))
}

/// Area-weighted surface samples of a scene object in world coordinates, with
/// PCA normals oriented to agree with the face each sample came from.
pub fn sample_object_surface(obj: &SceneObject, params: &SamplerParams, seed: u64) -> Result<PointCloud> {
    let samples = obj.mesh.sample_surface(params.surface_points, object_seed(seed, obj.instance_id));
    let points: Vec<Vec3> = samples.iter().map(|(p, _)| obj.pose.transform_point(p)).collect();
    let normals = pca_normals(&points, params.normal_k)?
        .into_iter()
        .zip(&samples)
        .map(|(n, (_, face))| {
            let outward = obj.pose.transform_vector(&obj.mesh.face_normal(*face));
            if n.dot(&outward) < 0.0 {
                -n
            } else {
                n
            }
        })
        .collect();
    let labels = vec![obj.instance_id; points.len()];
    PointCloud::new(points).with_normals(normals)?.with_labels(labels)
}

/// FPS centers (as indices into the surface cloud) for an object.
pub fn select_centers(cloud: &PointCloud, params: &SamplerParams, seed: u64, instance_id: u32) -> Result<Vec<usize>> {
    let m = params.num_fps_points.min(cloud.len());
    let start = (splitmix64(object_seed(seed, instance_id)) % cloud.len() as u64) as usize;
    farthest_point_sample(&cloud.points, m, start)
}

/// Gate-passing candidates for one target, ordered by center, direction,
/// in-plane angle, then standoff.
pub fn generate_candidates(
    scene: &Scene,
    target_id: u32,
    gripper: &GripperModel,
    params: &SamplerParams,
    seed: u64,
) -> Result<Vec<GraspCandidate>> {
    params.validate()?;
    let target = scene
        .object(target_id)
        .ok_or_else(|| Error::NotFound(format!("instance {target_id} not in scene")))?;
    let cloud = sample_object_surface(target, params, seed)?;
    let centers = select_centers(&cloud, params, seed, target_id)?;
    let normals = cloud.normals.as_ref().expect("surface samples carry normals");
    let corridor = params.max_standoff();

    let pairs: Vec<(Vec3, UnitVec3)> = centers
        .iter()
        .flat_map(|&c| {
            cone_directions(&normals[c], params)
                .into_iter()
                .map(move |dir| (c, dir))
        })
        .map(|(c, dir)| (cloud.points[c], dir))
        .collect();

    let per_pair: Vec<Vec<GraspCandidate>> = pairs
        .par_iter()
        .map(|(center, approach)| {
            if !approach_clear(scene, center, approach, gripper, corridor, params.approach_ray_margin) {
                return Vec::new();
            }
            let mut kept = Vec::new();
            for &a in &params.inplane_angles {
                for &d in &params.standoffs {
                    let Ok(mut cand) = GraspCandidate::new(target_id, *center, *approach, a, d) else {
                        continue;
                    };
                    let gate = overlap_gate(&cand.pose, target, scene, gripper, params, seed);
                    if gate.pass {
                        cand.collision_score = gate.collision_score;
                        kept.push(cand);
                    }
                }
            }
            kept
        })
        .collect();
    Ok(per_pair.into_iter().flatten().collect())
}

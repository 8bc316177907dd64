//! Quasi-static grasp evaluation.
//!
//! Stands in for a physics simulator: a grasp scores 1 when both fingers find
//! a contact, the contact normals sit inside the friction cone, and lifting
//! the gripper with the object straight up does not run into anything else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::overlap::MIN_OVERLAP_SAMPLES;
use crate::geometry::ray::nearest_on_mesh;
use crate::geometry::{mesh_mesh_overlap, RigidTransform, Scene, SceneObject, UnitVec3, Vec3};
use crate::gripper::GripperModel;
use crate::sampler::{body_overlap, GraspCandidate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub friction_mu: f64,
    /// m
    pub lift_height: f64,
    pub sweep_steps: usize,
    /// m
    pub contact_tolerance: f64,
    /// Largest tolerated interpenetration during the lift, m³.
    pub clearance_epsilon: f64,
    pub overlap_samples: usize,
    /// Rays per side of each finger's square contact fan.
    pub fan_rays: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            friction_mu: 0.6,
            lift_height: 0.10,
            sweep_steps: 10,
            contact_tolerance: 1e-4,
            clearance_epsilon: 1e-8,
            overlap_samples: 1024,
            fan_rays: 5,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("eval.{m}")));
        if !(self.friction_mu > 0.0) {
            return bad("friction_mu must be positive");
        }
        if !(self.lift_height > 0.0 && self.lift_height.is_finite()) {
            return bad("lift_height must be positive");
        }
        if self.sweep_steps < 2 {
            return bad("sweep_steps must be at least 2");
        }
        if !(self.contact_tolerance >= 0.0) {
            return bad("contact_tolerance must be non-negative");
        }
        if !(self.clearance_epsilon >= 0.0) {
            return bad("clearance_epsilon must be non-negative");
        }
        if self.overlap_samples < MIN_OVERLAP_SAMPLES {
            return bad("overlap_samples must be at least 1000");
        }
        if self.fan_rays < 2 {
            return bad("fan_rays must be at least 2");
        }
        Ok(())
    }
}

/// First contacts of the two closing fingers. `a` belongs to the finger on
/// the +closing-axis side, `b` to the one on the - side. Normals point out
/// of the object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contacts {
    pub contact_a: Vec3,
    pub contact_b: Vec3,
    pub normal_a: UnitVec3,
    pub normal_b: UnitVec3,
    pub width: f64,
}

/// Closest front-facing hit from one finger's fan: `(distance, point, normal)`.
fn finger_contact(
    pose: &RigidTransform,
    target: &SceneObject,
    gripper: &GripperModel,
    side: f64,
    tolerance: f64,
    fan: usize,
) -> Option<(f64, Vec3, UnitVec3)> {
    let region = &gripper.closing_region;
    let c = region.center();
    let h = region.half_extents;
    let half_open = gripper.max_opening / 2.0;
    let dir_local = Vec3::new(-side, 0.0, 0.0);
    let dir_world = pose.transform_vector(&dir_local);
    let dir_mesh = target.pose.inverse_transform_vector(&dir_world);
    let max_t = gripper.max_opening + tolerance;
    let step = |i: usize| -1.0 + 2.0 * i as f64 / (fan - 1) as f64;
    let mut best: Option<(f64, Vec3, UnitVec3)> = None;
    for iy in 0..fan {
        for iz in 0..fan {
            let origin_local = Vec3::new(
                side * (half_open + tolerance),
                c.y + h.y * step(iy),
                c.z + h.z * step(iz),
            );
            let origin_world = pose.transform_point(&origin_local);
            let origin_mesh = target.pose.inverse_transform_point(&origin_world);
            let front = |f: usize| target.mesh.face_normal(f).dot(&dir_mesh) < 0.0;
            if let Some((t, face)) = nearest_on_mesh(&target.mesh, &origin_mesh, &dir_mesh, max_t, front) {
                if best.is_none_or(|(bt, _, _)| t < bt) {
                    let n = target.pose.transform_vector(&target.mesh.face_normal(face));
                    best = Some((t, origin_world + dir_world * t, UnitVec3::new_normalize(n)));
                }
            }
        }
    }
    best
}

/// Closes both fingers on the target with ray fans across the closing region.
pub fn close_fingers(
    pose: &RigidTransform,
    target: &SceneObject,
    gripper: &GripperModel,
    contact_tolerance: f64,
    fan_rays: usize,
) -> Option<Contacts> {
    let fan = fan_rays.max(2);
    let (_, pa, na) = finger_contact(pose, target, gripper, 1.0, contact_tolerance, fan)?;
    let (_, pb, nb) = finger_contact(pose, target, gripper, -1.0, contact_tolerance, fan)?;
    let axis = pose.transform_vector(&gripper.closing_axis);
    let width = (pa - pb).dot(&axis);
    if width < -contact_tolerance {
        return None;
    }
    Some(Contacts {
        contact_a: pa,
        contact_b: pb,
        normal_a: na,
        normal_b: nb,
        width: width.max(0.0),
    })
}

/// Both contact normals within the friction cone half-angle `atan(mu)` of the
/// closing axis (`+axis` at contact a, `-axis` at contact b).
pub fn antipodal_check(contacts: &Contacts, closing_axis: &UnitVec3, mu: f64) -> bool {
    let cone = mu.atan();
    let angle = |n: &UnitVec3, axis: Vec3| n.dot(&axis).clamp(-1.0, 1.0).acos();
    angle(&contacts.normal_a, closing_axis.into_inner()) <= cone
        && angle(&contacts.normal_b, -closing_axis.into_inner()) <= cone
}

/// Lifts gripper and target together along world +z in `sweep_steps`
/// increments; fails if either runs into another scene object.
pub fn lift_sweep_check(
    pose: &RigidTransform,
    target: &SceneObject,
    scene: &Scene,
    gripper: &GripperModel,
    params: &EvalParams,
    seed: u64,
) -> bool {
    let others: Vec<&SceneObject> = scene
        .objects()
        .iter()
        .filter(|o| o.instance_id != target.instance_id)
        .collect();
    if others.is_empty() {
        return true;
    }
    let eps = params.clearance_epsilon;
    for step in 1..=params.sweep_steps {
        let dz = params.lift_height * step as f64 / params.sweep_steps as f64;
        let lift = RigidTransform::from_translation(Vec3::new(0.0, 0.0, dz));
        let lifted_pose = lift.compose(pose);
        let lifted_target = target.moved(&lift);
        for other in &others {
            if body_overlap(gripper, &lifted_pose, other, params.overlap_samples, seed, eps) > eps {
                return false;
            }
            if !lifted_target.world_aabb().overlaps(&other.world_aabb()) {
                continue;
            }
            let shared = mesh_mesh_overlap(
                &lifted_target.mesh,
                &lifted_target.pose,
                &other.mesh,
                &other.pose,
                params.overlap_samples,
                seed,
            );
            if shared > eps {
                return false;
            }
        }
    }
    true
}

/// Outcome of every sub-check, for inspection and decomposability tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub contacts: Option<Contacts>,
    pub antipodal: bool,
    pub lift_clear: bool,
    pub score: u8,
}

/// Runs all sub-checks without short-circuiting.
pub fn evaluate_report(
    candidate: &GraspCandidate,
    scene: &Scene,
    gripper: &GripperModel,
    params: &EvalParams,
    seed: u64,
) -> Result<EvalReport> {
    let target = scene
        .object(candidate.instance_id)
        .ok_or_else(|| Error::NotFound(format!("instance {} not in scene", candidate.instance_id)))?;
    let pose = &candidate.pose;
    let contacts = close_fingers(pose, target, gripper, params.contact_tolerance, params.fan_rays);
    let axis = UnitVec3::new_normalize(pose.transform_vector(&gripper.closing_axis));
    let antipodal = contacts.is_some_and(|c| antipodal_check(&c, &axis, params.friction_mu));
    let lift_clear = lift_sweep_check(pose, target, scene, gripper, params, seed);
    let score = u8::from(contacts.is_some() && antipodal && lift_clear);
    Ok(EvalReport {
        contacts,
        antipodal,
        lift_clear,
        score,
    })
}

/// Binary simulation score of a gated candidate.
pub fn evaluate_grasp(
    candidate: &GraspCandidate,
    scene: &Scene,
    gripper: &GripperModel,
    params: &EvalParams,
    seed: u64,
) -> Result<u8> {
    let target = scene
        .object(candidate.instance_id)
        .ok_or_else(|| Error::NotFound(format!("instance {} not in scene", candidate.instance_id)))?;
    let pose = &candidate.pose;
    let Some(contacts) = close_fingers(pose, target, gripper, params.contact_tolerance, params.fan_rays) else {
        return Ok(0);
    };
    let axis = UnitVec3::new_normalize(pose.transform_vector(&gripper.closing_axis));
    if !antipodal_check(&contacts, &axis, params.friction_mu) {
        return Ok(0);
    }
    Ok(u8::from(lift_sweep_check(pose, target, scene, gripper, params, seed)))
}

/// Pluggable grasp scoring.
pub trait GraspEvaluator: Send + Sync {
    fn name(&self) -> &str;

    fn evaluate(&self, candidate: &GraspCandidate, scene: &Scene, gripper: &GripperModel) -> Result<u8>;
}

#[derive(Clone, Debug, Default)]
pub struct QuasiStaticEvaluator {
    pub params: EvalParams,
    pub seed: u64,
}

impl GraspEvaluator for QuasiStaticEvaluator {
    fn name(&self) -> &str {
        "quasi-static"
    }

    fn evaluate(&self, candidate: &GraspCandidate, scene: &Scene, gripper: &GripperModel) -> Result<u8> {
        evaluate_grasp(candidate, scene, gripper, &self.params, self.seed)
    }
}

/// Looks up a built-in evaluator by name.
pub fn evaluator_by_name(name: &str, params: &EvalParams, seed: u64) -> Result<Box<dyn GraspEvaluator>> {
    match name {
        "quasi-static" => Ok(Box::new(QuasiStaticEvaluator {
            params: params.clone(),
            seed,
        })),
        other => Err(Error::Config(format!("evaluator: unknown evaluator `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, TriangleMesh};
    use std::f64::consts::FRAC_PI_2;
    use std::sync::Arc;

    fn place(mesh: TriangleMesh, at: Vec3, id: u32) -> SceneObject {
        SceneObject::new(Arc::new(mesh), RigidTransform::from_translation(at), id)
    }

    fn candidate(id: u32, pose: RigidTransform) -> GraspCandidate {
        let mut c = GraspCandidate::new(id, Vec3::zeros(), UnitVec3::new_normalize(Vec3::z()), 0.0, 0.0).unwrap();
        c.pose = pose;
        c
    }

    fn plate() -> SceneObject {
        place(primitives::cuboid(Vec3::new(0.005, 0.03, 0.03)), Vec3::new(0.0, 0.0, 0.025), 1)
    }

    #[test]
    fn plate_grasp_succeeds() {
        let g = GripperModel::default();
        let p = EvalParams::default();
        let id = RigidTransform::identity();
        let c = close_fingers(&id, &plate(), &g, p.contact_tolerance, p.fan_rays).unwrap();
        assert!((c.width - 0.01).abs() < p.contact_tolerance);
        assert!((c.normal_a.into_inner() - Vec3::x()).norm() < 1e-12);
        assert!((c.normal_b.into_inner() + Vec3::x()).norm() < 1e-12);
        let scene = Scene::new(vec![plate()]).unwrap();
        let report = evaluate_report(&candidate(1, id), &scene, &g, &p, 0).unwrap();
        assert!(report.antipodal && report.lift_clear);
        assert_eq!(report.score, 1);
        assert_eq!(evaluate_grasp(&candidate(1, RigidTransform::identity()), &scene, &g, &p, 0).unwrap(), 1);
    }

    #[test]
    fn empty_region_has_no_contacts() {
        let g = GripperModel::default();
        let far = place(primitives::cuboid(Vec3::repeat(0.01)), Vec3::new(1.0, 0.0, 0.0), 1);
        assert!(close_fingers(&RigidTransform::identity(), &far, &g, 1e-4, 5).is_none());
        let scene = Scene::new(vec![far]).unwrap();
        let e = evaluator_by_name("quasi-static", &EvalParams::default(), 0).unwrap();
        assert_eq!(e.name(), "quasi-static");
        assert_eq!(e.evaluate(&candidate(1, RigidTransform::identity()), &scene, &g).unwrap(), 0);
        assert!(evaluator_by_name("physx", &EvalParams::default(), 0).is_err());
    }

    #[test]
    fn one_sided_contact_fails() {
        // Cube buried in the +x finger: that fan starts inside and sees only back faces.
        let g = GripperModel::default();
        let cube = place(primitives::cuboid(Vec3::repeat(0.01)), Vec3::new(0.06, 0.0, 0.025), 1);
        assert!(close_fingers(&RigidTransform::identity(), &cube, &g, 1e-4, 5).is_none());
    }

    #[test]
    fn off_axis_sphere_outside_cone() {
        // The top fan row meets the sphere 40 degrees below its equator.
        let r = 0.03;
        let tilt = 40f64.to_radians();
        let sphere = place(primitives::uv_sphere(r, 128, 64), Vec3::new(0.0, 0.0, 0.05 + r * tilt.sin()), 1);
        let g = GripperModel::default();
        let id = RigidTransform::identity();
        let c = close_fingers(&id, &sphere, &g, 1e-4, 5).unwrap();
        let angle = c.normal_a.dot(&Vec3::x()).acos().to_degrees();
        assert!((angle - 40.0).abs() < 2.0, "{angle}");
        let axis = UnitVec3::new_normalize(Vec3::x());
        assert!(!antipodal_check(&c, &axis, 0.6));
        assert!(antipodal_check(&c, &axis, 1.0));
        assert!(antipodal_check(&c, &axis, 1e12));
        let scene = Scene::new(vec![sphere]).unwrap();
        let p = EvalParams::default();
        assert_eq!(evaluate_grasp(&candidate(1, id), &scene, &g, &p, 0).unwrap(), 0);
    }

    #[test]
    fn buried_object_blocks_lift() {
        let g = GripperModel::default();
        let p = EvalParams::default();
        let half = Vec3::repeat(0.02);
        let lower = place(primitives::cuboid(half), Vec3::new(0.0, 0.0, 0.02), 1);
        let upper = place(primitives::cuboid(half), Vec3::new(0.0, 0.0, 0.06), 2);
        // Side grasp: approach along world +y, closing along world x.
        let pose = RigidTransform::from_axis_angle(
            &UnitVec3::new_normalize(Vec3::x()),
            -FRAC_PI_2,
            Vec3::new(0.0, -0.045, 0.02),
        );
        let stacked = Scene::new(vec![lower.clone(), upper]).unwrap();
        let report = evaluate_report(&candidate(1, pose), &stacked, &g, &p, 3).unwrap();
        assert!(report.contacts.is_some() && report.antipodal);
        assert!(!report.lift_clear);
        assert_eq!(report.score, 0);

        let alone = Scene::new(vec![lower]).unwrap();
        assert_eq!(evaluate_grasp(&candidate(1, pose), &alone, &g, &p, 3).unwrap(), 1);
    }

    #[test]
    fn missing_target_is_error() {
        let scene = Scene::new(vec![plate()]).unwrap();
        let p = EvalParams::default();
        let r = evaluate_grasp(&candidate(9, RigidTransform::identity()), &scene, &GripperModel::default(), &p, 0);
        assert!(matches!(r, Err(Error::NotFound(_))));
    }

    #[test]
    fn params_validation() {
        assert!(EvalParams::default().validate().is_ok());
        let p = EvalParams { sweep_steps: 1, ..Default::default() };
        assert!(matches!(p.validate(), Err(Error::Config(m)) if m.starts_with("eval.sweep_steps")));
    }
}

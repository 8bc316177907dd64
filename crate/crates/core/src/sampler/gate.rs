use serde::{Deserialize, Serialize};

use super::SamplerParams;
use crate::codec::frame_from_approach;
use crate::geometry::overlap::box_mesh_overlap_volume;
use crate::geometry::{
    box_mesh_overlap, ray_cast, Aabb, RigidTransform, Scene, SceneObject, UnitVec3, Vec3,
};
use crate::gripper::GripperModel;

// Ray origins are nudged this far back so they do not hit the surface they start on.
const RAY_START_OFFSET: f64 = 1e-6;

/// Approach directions inside the cone around the inward normal `-normal`.
///
/// A zero cone angle yields `-normal` itself; every other angle yields a ring
/// of `azimuth_steps` directions starting at azimuth 0 of the approach frame.
pub fn cone_directions(normal: &UnitVec3, params: &SamplerParams) -> Vec<UnitVec3> {
    let inward = -normal.into_inner();
    let frame = frame_from_approach(&UnitVec3::new_unchecked(inward));
    let (u, w) = (frame.axis(0).into_inner(), frame.axis(1).into_inner());
    let mut out = Vec::new();
    for &alpha in &params.alpha_levels {
        if alpha == 0.0 {
            out.push(UnitVec3::new_unchecked(inward));
            continue;
        }
        let (sa, ca) = alpha.sin_cos();
        for j in 0..params.azimuth_steps {
            let phi = std::f64::consts::TAU * j as f64 / params.azimuth_steps as f64;
            let (sp, cp) = phi.sin_cos();
            out.push(UnitVec3::new_normalize(inward * ca + (u * cp + w * sp) * sa));
        }
    }
    out
}

/// Checks the retreat corridor behind a grasp center.
///
/// Casts a 3×3 grid of rays spanning the gripper base footprint (in the
/// zero in-plane-angle frame of `approach`), starting at the grasp center
/// plane and travelling along `-approach` for `standoff + margin`. The
/// corridor is clear when no ray hits anything within that length.
pub fn approach_clear(
    scene: &Scene,
    center: &Vec3,
    approach: &UnitVec3,
    gripper: &GripperModel,
    standoff: f64,
    margin: f64,
) -> bool {
    let length = standoff + margin;
    if length <= 0.0 {
        return true;
    }
    let frame = frame_from_approach(approach);
    let (u, w) = (frame.axis(0).into_inner(), frame.axis(1).into_inner());
    let h = gripper.base.half_extents;
    let back = UnitVec3::new_unchecked(-approach.into_inner());
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            let origin = center + u * (sx * h.x) + w * (sy * h.y) + back.into_inner() * RAY_START_OFFSET;
            if ray_cast(scene, &origin, &back, length).is_some() {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub pass: bool,
    pub collision_score: f64,
}

fn box_bounds(b: &crate::geometry::OrientedBox) -> Aabb {
    Aabb::from_points(b.corners().iter())
}

/// Largest overlap volume of any gripper body box against `obj`.
pub(crate) fn body_overlap(
    gripper: &GripperModel,
    pose: &RigidTransform,
    obj: &SceneObject,
    samples: usize,
    seed: u64,
    limit: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for b in gripper.body_boxes_at(pose) {
        if !box_bounds(&b).overlaps(&obj.world_aabb()) {
            continue;
        }
        worst = worst.max(box_mesh_overlap_volume(&b, &obj.mesh, &obj.pose, samples, seed));
        if worst > limit {
            break;
        }
    }
    worst
}

/// Body boxes must stay clear of every scene mesh; the closing region must
/// overlap the target enough. The collision score is that closing-region IOU.
pub fn overlap_gate(
    pose: &RigidTransform,
    target: &SceneObject,
    scene: &Scene,
    gripper: &GripperModel,
    params: &SamplerParams,
    seed: u64,
) -> GateResult {
    let fail = GateResult {
        pass: false,
        collision_score: 0.0,
    };
    for obj in scene.objects() {
        let eps = params.body_clearance_epsilon;
        if body_overlap(gripper, pose, obj, params.overlap_samples, seed, eps) > eps {
            return fail;
        }
    }
    let region = gripper.closing_region_at(pose);
    if !box_bounds(&region).overlaps(&target.world_aabb()) {
        return fail;
    }
    let iou = match box_mesh_overlap(&region, &target.mesh, &target.pose, params.overlap_samples, seed) {
        Ok(o) => o.iou.clamp(0.0, 1.0),
        Err(_) => return fail,
    };
    GateResult {
        pass: iou >= params.iou_pass_threshold,
        collision_score: iou,
    }
}

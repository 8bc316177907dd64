//! Benchmark fixtures.

use graspgen_core::demo::desk_scene;
use graspgen_core::geometry::{RigidTransform, Scene, UnitVec3, Vec3};
use graspgen_core::gripper::GripperModel;
use graspgen_core::refine::RefinedGrasp;
use graspgen_core::sampler::{generate_candidates, GraspCandidate, SamplerParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unit_vectors(n: usize, seed: u64) -> Vec<UnitVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            UnitVec3::new_normalize(Vec3::new(r * phi.cos(), r * phi.sin(), z))
        })
        .collect()
}

pub fn cloud(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(0.0..0.2)))
        .collect()
}

pub fn grasps(n: usize, seed: u64) -> Vec<RefinedGrasp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = unit_vectors(n, seed ^ 1);
    (0..n)
        .map(|i| RefinedGrasp {
            pose: RigidTransform::from_axis_angle(
                &dirs[i],
                rng.gen_range(0.0..3.0),
                Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(0.0..0.1)),
            ),
            confidence: rng.gen_range(0.0..1.0),
            instance_id: rng.gen_range(1..4),
            source: i,
        })
        .collect()
}

pub fn light_sampler() -> SamplerParams {
    SamplerParams {
        num_fps_points: 10,
        surface_points: 512,
        ..Default::default()
    }
}

/// The desk scene with a handful of gated candidates on the box.
pub fn desk_with_candidates() -> (Scene, GripperModel, Vec<GraspCandidate>) {
    let scene = desk_scene();
    let gripper = GripperModel::default();
    let cands = generate_candidates(&scene, 1, &gripper, &light_sampler(), 1).expect("desk scene samples");
    (scene, gripper, cands)
}

use graspgen_core::demo::desk_scene;
use graspgen_core::geometry::{UnitVec3, Vec3};
use graspgen_core::gripper::GripperModel;
use graspgen_core::sampler::{cone_directions, farthest_point_sample, generate_candidates, overlap_gate, SamplerParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_params() -> SamplerParams {
    SamplerParams {
        num_fps_points: 6,
        surface_points: 256,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn fps_ignores_input_order(pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 2..60),
                               shuffle in any::<u64>(), start in any::<prop::sample::Index>()) {
        let pts: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
        let start = start.index(pts.len());
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let permuted: Vec<Vec3> = perm.iter().map(|&i| pts[i]).collect();
        let new_start = perm.iter().position(|&i| i == start).unwrap();
        let m = pts.len();
        let a: Vec<Vec3> = farthest_point_sample(&pts, m, start).unwrap().iter().map(|&i| pts[i]).collect();
        let b: Vec<Vec3> = farthest_point_sample(&permuted, m, new_start).unwrap().iter().map(|&i| permuted[i]).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cone_angles(n in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(Vec3::from(n).norm() > 1e-3);
        let normal = UnitVec3::new_normalize(Vec3::from(n));
        let p = SamplerParams::default();
        let dirs = cone_directions(&normal, &p);
        prop_assert_eq!(dirs.len(), 1 + (p.alpha_levels.len() - 1) * p.azimuth_steps);
        for d in &dirs {
            let inward = -normal.into_inner();
            let angle = d.cross(&inward).norm().atan2(d.dot(&inward));
            prop_assert!(p.alpha_levels.iter().any(|a| (a - angle).abs() < 1e-9), "angle {}", angle);
        }
    }
}

#[test]
fn candidates_are_consistent_and_gated() {
    let scene = desk_scene();
    let gripper = GripperModel::default();
    let params = small_params();
    for obj in scene.objects() {
        let cands = generate_candidates(&scene, obj.instance_id, &gripper, &params, 21).unwrap();
        assert!(!cands.is_empty(), "instance {}", obj.instance_id);
        for c in &cands {
            c.validate().unwrap();
            assert_eq!(c.instance_id, obj.instance_id);
            let gate = overlap_gate(&c.pose, obj, &scene, &gripper, &params, 21);
            assert!(gate.pass);
            assert_eq!(gate.collision_score, c.collision_score);
            assert!(c.collision_score >= params.iou_pass_threshold);
        }
    }
}

#[test]
fn generation_is_reproducible() {
    let scene = desk_scene();
    let gripper = GripperModel::default();
    let params = small_params();
    let run = |seed| serde_json::to_string(&generate_candidates(&scene, 2, &gripper, &params, seed).unwrap()).unwrap();
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
    assert!(generate_candidates(&scene, 99, &gripper, &params, 5).is_err());
}

use graspgen_core::geometry::{PointCloud, RigidTransform, UnitVec3, Vec3};
use graspgen_core::gripper::GripperModel;
use graspgen_core::refine::{collision_filter, nms, top_percent, RefineParams, RefinedGrasp};
use proptest::prelude::*;

fn grasps() -> impl Strategy<Value = Vec<RefinedGrasp>> {
    let one = (
        prop::array::uniform3(-0.05f64..0.05),
        prop::array::uniform3(-1.0f64..1.0),
        0.0f64..std::f64::consts::PI,
        prop_oneof![0.0f64..=1.0, Just(0.5)],
        0u32..3,
    );
    prop::collection::vec(one, 0..80).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (t, axis, angle, confidence, instance_id))| {
                let axis = Vec3::from(axis) + Vec3::new(0.0, 0.0, 1e-3);
                RefinedGrasp {
                    pose: RigidTransform::from_axis_angle(&UnitVec3::new_normalize(axis), angle, Vec3::from(t)),
                    confidence,
                    instance_id,
                    source: i,
                }
            })
            .collect()
    })
}

fn conflict(a: &RefinedGrasp, b: &RefinedGrasp, p: &RefineParams) -> bool {
    let angle = a.pose.axis(2).dot(&b.pose.axis(2)).clamp(-1.0, 1.0).acos();
    a.instance_id == b.instance_id
        && (a.pose.translation() - b.pose.translation()).norm() < p.nms_translation
        && angle < p.nms_angle
}

proptest! {
    #[test]
    fn nms_properties(gs in grasps()) {
        let p = RefineParams::default();
        let kept = nms(&gs, &p);
        prop_assert!(kept.iter().all(|k| gs.contains(k)));
        for i in 0..kept.len() {
            for j in i + 1..kept.len() {
                prop_assert!(!conflict(&kept[i], &kept[j], &p));
            }
        }
        prop_assert_eq!(nms(&kept, &p), kept.clone());
        // Every dropped grasp is explained by a kept one on the same instance.
        for g in gs.iter().filter(|g| !kept.contains(g)) {
            prop_assert!(kept.iter().any(|k| conflict(k, g, &p)));
        }
        // Splitting by instance changes nothing.
        for id in 0..3 {
            let sub: Vec<_> = gs.iter().filter(|g| g.instance_id == id).cloned().collect();
            let expect: Vec<_> = kept.iter().filter(|g| g.instance_id == id).cloned().collect();
            prop_assert_eq!(nms(&sub, &p), expect);
        }
    }

    #[test]
    fn top_percent_nested(gs in grasps(), p1 in 0.1f64..=100.0, p2 in 0.1f64..=100.0) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let a = top_percent(&gs, lo);
        let b = top_percent(&gs, hi);
        prop_assert!(a.iter().all(|g| b.contains(g)));
        prop_assert_eq!(&b[..a.len()], &a[..]);
        if !gs.is_empty() {
            prop_assert_eq!(b.len(), ((hi / 100.0 * gs.len() as f64) - 1e-9).ceil().max(1.0) as usize);
        }
        prop_assert_eq!(top_percent(&gs, 100.0).len(), gs.len());
    }

    #[test]
    fn dilation_only_rejects_more(pts in prop::collection::vec(prop::array::uniform3(-0.15f64..0.15), 0..200),
                                  d1 in 0.0f64..0.02, d2 in 0.0f64..0.02) {
        let g = GripperModel::default();
        let cloud = PointCloud::new(pts.into_iter().map(Vec3::from).collect());
        let id = RigidTransform::identity();
        let (small, large) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        if !collision_filter(&id, &cloud, &g, small) {
            prop_assert!(!collision_filter(&id, &cloud, &g, large));
        }
    }
}

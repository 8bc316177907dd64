use std::f64::consts::PI;

use graspgen_core::codec::{compose_grasp_pose, decompose_grasp_pose, frame_from_approach, DirectionLattice};
use graspgen_core::geometry::{UnitVec3, Vec3};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = UnitVec3> {
    (-1.0f64..1.0, 0.0f64..2.0 * PI).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        UnitVec3::new_normalize(Vec3::new(r * phi.cos(), r * phi.sin(), z))
    })
}

fn brute_force(lattice: &DirectionLattice, v: &UnitVec3) -> usize {
    let mut best = 0;
    for (i, u) in lattice.vectors().iter().enumerate() {
        if u.dot(v) > lattice.vectors()[best].dot(v) {
            best = i;
        }
    }
    best
}

fn is_rotation(m: &graspgen_core::geometry::Mat3) -> bool {
    (m.transpose() * m - graspgen_core::geometry::Mat3::identity()).abs().max() < 1e-9
        && (m.determinant() - 1.0).abs() < 1e-9
}

#[test]
fn lattice_shape() {
    let two = DirectionLattice::build(2).unwrap();
    assert_eq!(two.decode(0).unwrap().z, 0.5);
    assert_eq!(two.decode(1).unwrap().z, -0.5);
    let l = DirectionLattice::build(800).unwrap();
    let mean: Vec3 = l.vectors().iter().map(|v| v.into_inner()).sum::<Vec3>() / 800.0;
    assert!(mean.norm() < 0.01);
    assert!(l.vectors().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    assert!(l.decode(800).is_err());
    assert!(DirectionLattice::build(1).is_err());
}

#[test]
fn round_trip_small_lattices() {
    for n in [2, 3, 7, 50, 801, 2000] {
        let l = DirectionLattice::build(n).unwrap();
        for k in 0..n {
            assert_eq!(l.encode(&l.decode(k).unwrap()), k, "n={n} k={k}");
        }
    }
}

proptest! {
    #[test]
    fn encode_is_nearest(v in unit(), n in prop::sample::select(vec![2usize, 5, 64, 800, 1500])) {
        let l = DirectionLattice::build(n).unwrap();
        let k = l.encode(&v);
        let b = brute_force(&l, &v);
        prop_assert!(k == b || (l.vectors()[k].dot(&v) - l.vectors()[b].dot(&v)).abs() == 0.0);
    }

    #[test]
    fn frames_are_rotations(v in unit()) {
        let f = frame_from_approach(&v);
        prop_assert!(is_rotation(f.rotation()));
        prop_assert!((f.axis(2).into_inner() - v.into_inner()).norm() < 1e-12);
    }

    #[test]
    fn compose_decompose(v in unit(), a in 0.0f64..2.0 * PI, d in 0.0f64..0.1,
                         c in prop::array::uniform3(-1.0f64..1.0)) {
        let center = Vec3::from(c);
        let pose = compose_grasp_pose(&center, &v, a, d).unwrap();
        prop_assert!(is_rotation(pose.rotation()));
        let (v2, a2, d2) = decompose_grasp_pose(&pose, &center);
        prop_assert!((v2.into_inner() - v.into_inner()).norm() < 1e-9);
        let da = (a2 - a).rem_euclid(2.0 * PI);
        prop_assert!(da < 1e-9 || 2.0 * PI - da < 1e-9);
        prop_assert!((d2 - d).abs() < 1e-9);
    }

    #[test]
    fn half_turn_flips_closing_axis(v in unit(), a in 0.0f64..PI) {
        let p = compose_grasp_pose(&Vec3::zeros(), &v, a, 0.0).unwrap();
        let q = compose_grasp_pose(&Vec3::zeros(), &v, a + PI, 0.0).unwrap();
        prop_assert!((p.axis(0).into_inner() + q.axis(0).into_inner()).norm() < 1e-9);
        prop_assert!((p.axis(2).into_inner() - q.axis(2).into_inner()).norm() < 1e-12);
    }
}

#[test]
fn pose_examples() {
    let down = UnitVec3::new_normalize(-Vec3::z());
    let f = frame_from_approach(&down);
    assert_eq!(f.axis(2).into_inner(), -Vec3::z());
    assert!(f.axis(0).z.abs() < 1e-12);
    let up = UnitVec3::new_normalize(Vec3::z());
    assert!(is_rotation(frame_from_approach(&up).rotation()));

    let p = compose_grasp_pose(&Vec3::zeros(), &down, 0.0, 0.02).unwrap();
    assert!((p.translation() - Vec3::new(0.0, 0.0, 0.02)).norm() < 1e-15);
    let c = Vec3::new(0.3, -0.2, 0.1);
    let p = compose_grasp_pose(&c, &down, 0.0, 0.0).unwrap();
    assert_eq!(*p.translation(), c);
    assert_eq!(p.rotation(), f.rotation());
    assert!(compose_grasp_pose(&c, &down, 2.0 * PI, 0.0).is_err());
    assert!(compose_grasp_pose(&c, &down, 0.0, -0.01).is_err());
}

#[test]
fn distinct_grid_poses() {
    // Different (class, a, d) cells within a < pi never share a pose.
    let l = DirectionLattice::build(40).unwrap();
    let angles: Vec<f64> = (0..6).map(|i| i as f64 * PI / 6.0).collect();
    let depths = [0.0, 0.01, 0.02];
    let mut poses = Vec::new();
    for v in l.vectors() {
        for &a in &angles {
            for &d in &depths {
                poses.push(compose_grasp_pose(&Vec3::zeros(), v, a, d).unwrap());
            }
        }
    }
    for i in 0..poses.len() {
        for j in i + 1..poses.len() {
            let dr = (poses[i].rotation() - poses[j].rotation()).abs().max();
            let dt = (poses[i].translation() - poses[j].translation()).norm();
            assert!(dr > 1e-6 || dt > 1e-6, "{i} {j}");
        }
    }
}

//! Fibonacci-lattice direction classes and grasp pose composition.
//!
//! Lattice point `i` of `V` sits at height `z = 1 - 2(i + 0.5)/V` and azimuth
//! `2πi(1 - 1/φ)` with φ the golden ratio. Heights decrease strictly with the
//! index, which is what the nearest-class search exploits.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, RigidTransform, UnitVec3, Vec3};

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Class count used by the grasp annotation and decoding stages.
pub const DEFAULT_CLASSES: usize = 800;

#[derive(Clone, Debug)]
pub struct DirectionLattice {
    vectors: Vec<UnitVec3>,
}

impl DirectionLattice {
    pub fn build(classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::invalid(format!(
                "lattice needs at least 2 classes, got {classes}"
            )));
        }
        let n = classes as f64;
        let vectors = (0..classes)
            .map(|i| {
                let fi = i as f64;
                let z = 1.0 - 2.0 * (fi + 0.5) / n;
                let azimuth = 2.0 * PI * fi * (1.0 - 1.0 / GOLDEN_RATIO);
                let r = (1.0 - z * z).sqrt();
                UnitVec3::new_unchecked(Vec3::new(r * azimuth.cos(), r * azimuth.sin(), z))
            })
            .collect();
        Ok(Self { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[UnitVec3] {
        &self.vectors
    }

    pub fn decode(&self, class: usize) -> Result<UnitVec3> {
        self.vectors.get(class).copied().ok_or_else(|| {
            Error::invalid(format!(
                "class {class} out of range for {} classes",
                self.vectors.len()
            ))
        })
    }

    /// Class whose vector has the largest dot product with `v`; lowest index on ties.
    pub fn encode(&self, v: &UnitVec3) -> usize {
        let n = self.vectors.len();
        let nf = n as f64;
        let index_for_z = |z: f64| (1.0 - z) * nf / 2.0 - 0.5;
        let clamp = |x: f64| x.clamp(0.0, (n - 1) as f64) as usize;

        // Seed the search with the band around the query height.
        let guess = clamp(index_for_z(v.z).round());
        let window = 2 * (nf.sqrt() as usize) + 3;
        let lo = guess.saturating_sub(window);
        let hi = (guess + window).min(n - 1);
        let seed_dot = (lo..=hi)
            .map(|i| self.vectors[i].dot(v))
            .fold(f64::NEG_INFINITY, f64::max);

        // Anything at least as close lies within this chord, hence within this
        // height band, hence within a contiguous index range.
        let chord = (2.0 - 2.0 * seed_dot).max(0.0).sqrt() + 1e-9;
        let first = clamp(index_for_z(v.z + chord).floor()).saturating_sub(1);
        let last = (clamp(index_for_z(v.z - chord).ceil()) + 1).min(n - 1);
        let mut best = first;
        let mut best_dot = self.vectors[first].dot(v);
        for i in first + 1..=last {
            let d = self.vectors[i].dot(v);
            if d > best_dot {
                best = i;
                best_dot = d;
            }
        }
        best
    }
}

/// Gripper orientation whose z-column is `approach`.
///
/// The x-column is `approach × up` normalized, with `up = +z` unless the
/// approach is within ~2.6° of ±z, where `up = +x` is used instead.
pub fn frame_from_approach(approach: &UnitVec3) -> RigidTransform {
    let z = approach.into_inner();
    let up = if z.z.abs() > 0.999 { Vec3::x() } else { Vec3::z() };
    let x = z.cross(&up).normalize();
    let y = z.cross(&x);
    RigidTransform::from_parts(Mat3::from_columns(&[x, y, z]), Vec3::zeros())
}

/// Rotation about the local z-axis.
pub fn rotation_about_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Full grasp pose: frame from the approach, spun by the in-plane angle,
/// with the origin standing off `depth` behind `center` along the approach.
pub fn compose_grasp_pose(
    center: &Vec3,
    approach: &UnitVec3,
    inplane_angle: f64,
    depth: f64,
) -> Result<RigidTransform> {
    if !(0.0..2.0 * PI).contains(&inplane_angle) {
        return Err(Error::invalid(format!(
            "in-plane angle {inplane_angle} outside [0, 2π)"
        )));
    }
    if !(depth >= 0.0 && depth.is_finite()) {
        return Err(Error::invalid(format!("depth {depth} must be non-negative")));
    }
    let frame = frame_from_approach(approach);
    let rotation = frame.rotation() * rotation_about_z(inplane_angle);
    let translation = center - approach.into_inner() * depth;
    Ok(RigidTransform::from_parts(rotation, translation))
}

/// Inverse of [`compose_grasp_pose`] for a known grasp center:
/// returns `(approach, inplane_angle, depth)`.
pub fn decompose_grasp_pose(pose: &RigidTransform, center: &Vec3) -> (UnitVec3, f64, f64) {
    let approach = pose.axis(2);
    let depth = (center - pose.translation()).dot(&approach);
    let frame = frame_from_approach(&approach);
    let x = pose.axis(0);
    let mut angle = x.dot(&frame.axis(1)).atan2(x.dot(&frame.axis(0)));
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    if angle >= 2.0 * PI {
        angle = 0.0;
    }
    (approach, angle, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_class_lattice_is_antipodal_in_z() {
        let l = DirectionLattice::build(2).unwrap();
        assert_eq!(l.decode(0).unwrap().z, 0.5);
        assert_eq!(l.decode(1).unwrap().z, -0.5);
    }

    #[test]
    fn rejects_tiny_lattice_and_bad_index() {
        assert!(DirectionLattice::build(1).is_err());
        let l = DirectionLattice::build(800).unwrap();
        assert!(l.decode(800).is_err());
    }

    #[test]
    fn vectors_are_unit() {
        for v in [2, 3, 17, 800, 1001] {
            let l = DirectionLattice::build(v).unwrap();
            assert!(l.vectors().iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn self_nearest() {
        let l = DirectionLattice::build(800).unwrap();
        for k in 0..l.len() {
            assert_eq!(l.encode(&l.decode(k).unwrap()), k);
        }
    }

    #[test]
    fn downward_approach_frame() {
        let f = frame_from_approach(&UnitVec3::new_normalize(-Vec3::z()));
        assert_eq!(f.axis(2).into_inner(), -Vec3::z());
        assert!(f.axis(0).z.abs() < 1e-12);
        assert!(f.is_valid());
        let up = frame_from_approach(&UnitVec3::new_normalize(Vec3::z()));
        assert!(up.is_valid());
        assert_eq!(up.axis(2).into_inner(), Vec3::z());
    }

    #[test]
    fn compose_formula_cases() {
        let down = UnitVec3::new_normalize(-Vec3::z());
        let p = compose_grasp_pose(&Vec3::zeros(), &down, 0.0, 0.02).unwrap();
        assert!((p.translation() - Vec3::new(0.0, 0.0, 0.02)).norm() < 1e-15);
        let c = Vec3::new(0.1, 0.2, 0.3);
        let p0 = compose_grasp_pose(&c, &down, 0.0, 0.0).unwrap();
        assert_eq!(*p0.translation(), c);
        assert_eq!(p0.rotation(), frame_from_approach(&down).rotation());
        let pi = compose_grasp_pose(&c, &down, PI, 0.0).unwrap();
        assert!((pi.axis(0).into_inner() + p0.axis(0).into_inner()).norm() < 1e-12);
    }

    #[test]
    fn compose_rejects_out_of_range() {
        let down = UnitVec3::new_normalize(-Vec3::z());
        assert!(compose_grasp_pose(&Vec3::zeros(), &down, 2.0 * PI, 0.0).is_err());
        assert!(compose_grasp_pose(&Vec3::zeros(), &down, 0.0, -0.1).is_err());
    }

    #[test]
    fn decompose_inverts_compose() {
        let a = UnitVec3::new_normalize(Vec3::new(0.3, -0.4, -0.8));
        let c = Vec3::new(0.01, 0.02, 0.03);
        let p = compose_grasp_pose(&c, &a, 1.1, 0.03).unwrap();
        let (a2, ang, d) = decompose_grasp_pose(&p, &c);
        assert!((a2.into_inner() - a.into_inner()).norm() < 1e-12);
        assert!((ang - 1.1).abs() < 1e-12);
        assert!((d - 0.03).abs() < 1e-12);
    }
}

use serde::{Deserialize, Serialize};

use super::{Mat3, UnitVec3, Vec3, UNIT_TOLERANCE};
use crate::error::{Error, Result};

/// Proper rigid motion: `x -> rotation * x + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformRepr", into = "TransformRepr")]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

/// On-disk form: row-major rotation and a translation triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformRepr {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

impl TryFrom<TransformRepr> for RigidTransform {
    type Error = Error;

    fn try_from(r: TransformRepr) -> Result<Self> {
        let rotation = Mat3::from_row_slice(&r.rotation);
        RigidTransform::new(rotation, Vec3::from(r.translation))
    }
}

impl From<RigidTransform> for TransformRepr {
    fn from(t: RigidTransform) -> Self {
        let m = t.rotation;
        TransformRepr {
            rotation: [
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(1, 0)],
                m[(1, 1)],
                m[(1, 2)],
                m[(2, 0)],
                m[(2, 1)],
                m[(2, 2)],
            ],
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Validates orthonormality and handedness of `rotation`.
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        if !is_rotation(&rotation) {
            return Err(Error::invalid(format!(
                "matrix is not a proper rotation: {rotation:?}"
            )));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("translation is not finite"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Caller guarantees `rotation` is a proper rotation.
    pub(crate) fn from_parts(rotation: Mat3, translation: Vec3) -> Self {
        debug_assert!(is_rotation(&rotation));
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: &UnitVec3, angle: f64, translation: Vec3) -> Self {
        let rotation = *nalgebra::Rotation3::from_axis_angle(axis, angle).matrix();
        Self {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse_transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.tr_mul(&(p - self.translation))
    }

    pub fn inverse_transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation.tr_mul(v)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Column `i` of the rotation, i.e. the i-th local axis in the parent frame.
    pub fn axis(&self, i: usize) -> UnitVec3 {
        UnitVec3::new_normalize(self.rotation.column(i).into_owned())
    }

    pub fn is_valid(&self) -> bool {
        is_rotation(&self.rotation)
    }
}

pub(crate) fn is_rotation(m: &Mat3) -> bool {
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let err = (m.transpose() * m - Mat3::identity()).abs().max();
    err <= UNIT_TOLERANCE && (m.determinant() - 1.0).abs() <= UNIT_TOLERANCE
}

/// Box given by its pose (center and axes) and strictly positive half extents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub pose: RigidTransform,
    pub half_extents: Vec3,
}

impl OrientedBox {
    pub fn new(pose: RigidTransform, half_extents: Vec3) -> Result<Self> {
        if !half_extents.iter().all(|h| *h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!(
                "box half extents must be positive, got {:?}",
                half_extents.as_slice()
            )));
        }
        Ok(Self { pose, half_extents })
    }

    pub fn axis_aligned(center: Vec3, half_extents: Vec3) -> Result<Self> {
        Self::new(RigidTransform::from_translation(center), half_extents)
    }

    pub fn center(&self) -> Vec3 {
        *self.pose.translation()
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// Same box expressed after applying `t` to its frame.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            pose: t.compose(&self.pose),
            half_extents: self.half_extents,
        }
    }

    /// Grows every half extent by `amount`.
    pub fn dilated(&self, amount: f64) -> Self {
        Self {
            pose: self.pose,
            half_extents: self.half_extents.add_scalar(amount),
        }
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, p: &Vec3) -> bool {
        let local = self.pose.inverse_transform_point(p);
        local.x.abs() <= self.half_extents.x
            && local.y.abs() <= self.half_extents.y
            && local.z.abs() <= self.half_extents.z
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self
                .pose
                .transform_point(&Vec3::new(sx * h.x, sy * h.y, sz * h.z));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repr_round_trip_is_exact() {
        let axis = UnitVec3::new_normalize(Vec3::new(0.3, -0.2, 0.9));
        let t = RigidTransform::from_axis_angle(&axis, 1.234, Vec3::new(0.1, 0.2, -0.3));
        let json = serde_json::to_string(&t).unwrap();
        let back: RigidTransform = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn rejects_reflection() {
        let m = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(m, Vec3::zeros()).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let axis = UnitVec3::new_normalize(Vec3::new(1.0, 2.0, 3.0));
        let t = RigidTransform::from_axis_angle(&axis, 0.7, Vec3::new(1.0, -2.0, 0.5));
        let id = t.compose(&t.inverse());
        assert!((id.rotation() - Mat3::identity()).abs().max() < 1e-12);
        assert!(id.translation().norm() < 1e-12);
    }

    #[test]
    fn box_rejects_non_positive_extent() {
        assert!(OrientedBox::axis_aligned(Vec3::zeros(), Vec3::new(1.0, 0.0, 1.0)).is_err());
    }
}

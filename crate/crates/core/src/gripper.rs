//! Four-box parallel-jaw gripper.
//!
//! Gripper frame: +z is the approach axis, +x the closing axis, origin at the
//! palm between the finger roots. Fingers extend forward over
//! `z ∈ [0, finger_length]`; base and tail sit behind the palm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, RigidTransform, UnitVec3, Vec3, UNIT_TOLERANCE};

/// Gripper dimensions in meters, as they appear in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GripperDims {
    pub max_opening: f64,
    pub finger_length: f64,
    pub finger_thickness: f64,
    pub finger_width: f64,
    pub base_depth: f64,
    pub tail_length: f64,
    pub tail_width: f64,
}

impl Default for GripperDims {
    fn default() -> Self {
        Self {
            max_opening: 0.10,
            finger_length: 0.05,
            finger_thickness: 0.015,
            finger_width: 0.02,
            base_depth: 0.02,
            tail_length: 0.08,
            tail_width: 0.02,
        }
    }
}

impl GripperDims {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("max_opening", self.max_opening),
            ("finger_length", self.finger_length),
            ("finger_thickness", self.finger_thickness),
            ("finger_width", self.finger_width),
            ("base_depth", self.base_depth),
            ("tail_length", self.tail_length),
            ("tail_width", self.tail_width),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("gripper.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GripperModel {
    /// `[+x finger, -x finger]`.
    pub fingers: [OrientedBox; 2],
    pub base: OrientedBox,
    pub tail: OrientedBox,
    pub closing_region: OrientedBox,
    pub max_opening: f64,
    pub closing_axis: UnitVec3,
    pub approach_axis: UnitVec3,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self::from_dims(&GripperDims::default()).expect("default gripper is valid")
    }
}

impl GripperModel {
    pub fn from_dims(d: &GripperDims) -> Result<Self> {
        d.validate()?;
        let half_open = d.max_opening / 2.0;
        let half_len = d.finger_length / 2.0;
        let half_w = d.finger_width / 2.0;
        let finger_half = Vec3::new(d.finger_thickness / 2.0, half_w, half_len);
        let finger_x = half_open + d.finger_thickness / 2.0;
        let fingers = [
            OrientedBox::axis_aligned(Vec3::new(finger_x, 0.0, half_len), finger_half)?,
            OrientedBox::axis_aligned(Vec3::new(-finger_x, 0.0, half_len), finger_half)?,
        ];
        let base = OrientedBox::axis_aligned(
            Vec3::new(0.0, 0.0, -d.base_depth / 2.0),
            Vec3::new(half_open + d.finger_thickness, half_w, d.base_depth / 2.0),
        )?;
        let tail = OrientedBox::axis_aligned(
            Vec3::new(0.0, 0.0, -d.base_depth - d.tail_length / 2.0),
            Vec3::new(d.tail_width / 2.0, d.tail_width / 2.0, d.tail_length / 2.0),
        )?;
        let closing_region = OrientedBox::axis_aligned(
            Vec3::new(0.0, 0.0, half_len),
            Vec3::new(half_open, half_w, half_len),
        )?;
        let model = Self {
            fingers,
            base,
            tail,
            closing_region,
            max_opening: d.max_opening,
            closing_axis: UnitVec3::new_unchecked(Vec3::x()),
            approach_axis: UnitVec3::new_unchecked(Vec3::z()),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.closing_axis.dot(&self.approach_axis).abs() > UNIT_TOLERANCE {
            return Err(Error::invariant("closing axis not perpendicular to approach axis"));
        }
        // Closing region projected on the closing axis must sit inside the finger gap.
        let proj = |b: &OrientedBox| {
            let c = b.center().dot(&self.closing_axis);
            let r: f64 = (0..3)
                .map(|i| b.half_extents[i] * b.pose.axis(i).dot(&self.closing_axis).abs())
                .sum();
            (c - r, c + r)
        };
        let (lo, hi) = proj(&self.closing_region);
        let (a_lo, _) = proj(&self.fingers[0]);
        let (_, b_hi) = proj(&self.fingers[1]);
        let eps = 1e-12;
        if lo < b_hi - eps || hi > a_lo + eps {
            return Err(Error::invariant("closing region is not between the fingers"));
        }
        Ok(())
    }

    /// Fingers, base, tail.
    pub fn body_boxes(&self) -> [OrientedBox; 4] {
        [self.fingers[0], self.fingers[1], self.base, self.tail]
    }

    pub fn body_boxes_at(&self, pose: &RigidTransform) -> [OrientedBox; 4] {
        self.body_boxes().map(|b| b.transformed(pose))
    }

    pub fn closing_region_at(&self, pose: &RigidTransform) -> OrientedBox {
        self.closing_region.transformed(pose)
    }

    /// Extent of the gripper behind the palm along -z.
    pub fn rear_length(&self) -> f64 {
        self.body_boxes()
            .iter()
            .flat_map(|b| b.corners())
            .map(|c| -c.z)
            .fold(0.0, f64::max)
    }
}

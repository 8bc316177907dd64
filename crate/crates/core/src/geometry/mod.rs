//! Geometric primitives and queries shared by every pipeline stage.
//!
//! Everything here is immutable after construction. Meshes carry their own
//! bounding-volume hierarchy so ray casts and box queries stay cheap enough
//! for per-candidate use.

mod bvh;
pub mod io;
mod mesh;
pub mod overlap;
pub mod primitives;
pub(crate) mod ray;
mod scene;
mod transform;

pub use bvh::{Aabb, Bvh};
pub use mesh::{MeshLoad, TriangleMesh};
pub use overlap::{box_mesh_overlap, mesh_mesh_overlap, points_in_box, Overlap};
pub use ray::{ray_cast, ray_triangle, Hit, TriangleHit};
pub use scene::{Scene, SceneDescription, SceneObject, SceneObjectDesc};
pub use transform::{OrientedBox, RigidTransform, TransformRepr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type UnitVec3 = nalgebra::Unit<Vec3>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Tolerance on unit-vector norms and rotation orthonormality.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Wraps a vector that is already unit length, rejecting anything else.
pub fn unit_checked(v: Vec3) -> Result<UnitVec3> {
    if (v.norm() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::invalid(format!(
            "vector {:?} is not unit length (norm {})",
            v.as_slice(),
            v.norm()
        )));
    }
    Ok(UnitVec3::new_unchecked(v))
}

/// Points with optional normals and per-point instance labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<UnitVec3>>,
    pub instance_labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self {
            points,
            normals: None,
            instance_labels: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<UnitVec3>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "normal count {} does not match point count {}",
                normals.len(),
                self.points.len()
            )));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "label count {} does not match point count {}",
                labels.len(),
                self.points.len()
            )));
        }
        self.instance_labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Concatenates clouds; normals and labels survive only if every part has them.
    pub fn concat(parts: &[PointCloud]) -> PointCloud {
        let points = parts.iter().flat_map(|c| c.points.iter().copied()).collect();
        let normals = parts
            .iter()
            .map(|c| c.normals.as_ref())
            .collect::<Option<Vec<_>>>()
            .map(|ns| ns.into_iter().flatten().copied().collect());
        let instance_labels = parts
            .iter()
            .map(|c| c.instance_labels.as_ref())
            .collect::<Option<Vec<_>>>()
            .map(|ls| ls.into_iter().flatten().copied().collect());
        PointCloud {
            points,
            normals,
            instance_labels,
        }
    }
}

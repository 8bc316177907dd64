//! Box containment and Monte-Carlo overlap volumes.
//!
//! Overlap estimates sample a seeded Kronecker (additive recurrence) sequence
//! inside the query box and classify each sample with the mesh parity test.
//! Boxes that cut no triangle are classified exactly from their center.

use serde::{Deserialize, Serialize};

use super::bvh::Aabb;
use super::{OrientedBox, PointCloud, RigidTransform, TriangleMesh, Vec3};
use crate::error::{Error, Result};

pub const MIN_OVERLAP_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    /// Estimated shared volume, m³.
    pub overlap_volume: f64,
    /// `overlap / (vol(box) + vol(mesh) - overlap)`, clamped to `[0, 1]`.
    pub iou: f64,
    /// False when the mesh is open, so its enclosed volume (and the IOU) is unreliable.
    pub volume_reliable: bool,
}

/// Indices of cloud points inside `bx`, boundary inclusive, ascending.
pub fn points_in_box(bx: &OrientedBox, cloud: &PointCloud) -> Vec<usize> {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| bx.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Deterministic low-discrepancy points in the open unit cube.
///
/// Additive recurrence on the inverse powers of the plastic-like constant for
/// three dimensions, rotated by a seed-derived offset.
#[derive(Clone, Debug)]
pub struct KroneckerSequence {
    offset: [f64; 3],
    index: u64,
}

const KRONECKER_ALPHA: [f64; 3] = {
    // Root of x^4 = x + 1.
    let g = 1.220_744_084_605_759_5;
    [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)]
};

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

impl KroneckerSequence {
    pub fn new(seed: u64) -> Self {
        let a = splitmix64(seed);
        let b = splitmix64(a);
        let c = splitmix64(b);
        Self {
            offset: [unit_from_bits(a), unit_from_bits(b), unit_from_bits(c)],
            index: 0,
        }
    }
}

impl Iterator for KroneckerSequence {
    type Item = [f64; 3];

    fn next(&mut self) -> Option<[f64; 3]> {
        self.index += 1;
        let i = self.index as f64;
        let mut out = [0.0; 3];
        for k in 0..3 {
            let mut u = (self.offset[k] + i * KRONECKER_ALPHA[k]).fract();
            // Keep samples strictly inside so they never sit on a box face.
            if u == 0.0 {
                u = 0.5;
            }
            out[k] = u;
        }
        Some(out)
    }
}

/// Separating-axis test between a triangle and a box centered at the origin
/// with the given half extents (all in the box frame). Touching counts.
pub(crate) fn triangle_box_overlap(tri: &[Vec3; 3], h: &Vec3) -> bool {
    let edges = [tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]];
    let separated = |axis: &Vec3| -> bool {
        if axis.norm_squared() < 1e-30 {
            return false;
        }
        let p0 = tri[0].dot(axis);
        let p1 = tri[1].dot(axis);
        let p2 = tri[2].dot(axis);
        let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
        p0.min(p1).min(p2) > r || p0.max(p1).max(p2) < -r
    };
    let basis = [Vec3::x(), Vec3::y(), Vec3::z()];
    if basis.iter().any(&separated) {
        return false;
    }
    if separated(&edges[0].cross(&edges[1])) {
        return false;
    }
    for b in &basis {
        for e in &edges {
            if separated(&b.cross(e)) {
                return false;
            }
        }
    }
    true
}

/// True when any triangle of `mesh` touches the box given in the mesh frame.
fn box_cuts_surface(local_box: &OrientedBox, mesh: &TriangleMesh) -> bool {
    let query = Aabb::from_points(local_box.corners().iter());
    let mut hit = false;
    mesh.bvh().traverse_aabb(&query, |f| {
        let tri = mesh
            .triangle(f)
            .map(|v| local_box.pose.inverse_transform_point(&v));
        if triangle_box_overlap(&tri, &local_box.half_extents) {
            hit = true;
        }
        !hit
    });
    hit
}

/// Volume of `bx` inside `mesh` (posed by `mesh_pose`) and the resulting IOU.
pub fn box_mesh_overlap(
    bx: &OrientedBox,
    mesh: &TriangleMesh,
    mesh_pose: &RigidTransform,
    n_samples: usize,
    seed: u64,
) -> Result<Overlap> {
    if n_samples < MIN_OVERLAP_SAMPLES {
        return Err(Error::invalid(format!(
            "n_samples must be at least {MIN_OVERLAP_SAMPLES}, got {n_samples}"
        )));
    }
    let overlap_volume = box_mesh_overlap_volume(bx, mesh, mesh_pose, n_samples, seed);
    let box_volume = bx.volume();
    let union = box_volume + mesh.volume() - overlap_volume;
    let iou = if union > 0.0 {
        (overlap_volume / union).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Overlap {
        overlap_volume,
        iou,
        volume_reliable: mesh.is_closed(),
    })
}

pub(crate) fn box_mesh_overlap_volume(
    bx: &OrientedBox,
    mesh: &TriangleMesh,
    mesh_pose: &RigidTransform,
    n_samples: usize,
    seed: u64,
) -> f64 {
    let local_box = bx.transformed(&mesh_pose.inverse());
    let box_bounds = Aabb::from_points(local_box.corners().iter());
    if !box_bounds.overlaps(&mesh.aabb()) {
        return 0.0;
    }
    if !box_cuts_surface(&local_box, mesh) {
        return if mesh.contains_point(&local_box.center()) {
            local_box.volume()
        } else {
            0.0
        };
    }
    let h = local_box.half_extents;
    let inside = KroneckerSequence::new(seed)
        .take(n_samples)
        .filter(|u| {
            let p = Vec3::new(
                (2.0 * u[0] - 1.0) * h.x,
                (2.0 * u[1] - 1.0) * h.y,
                (2.0 * u[2] - 1.0) * h.z,
            );
            mesh.contains_point(&local_box.pose.transform_point(&p))
        })
        .count();
    local_box.volume() * inside as f64 / n_samples as f64
}

/// Monte-Carlo volume shared by two posed meshes, sampled in `a`'s frame over
/// the intersection of `a`'s bounds with those of `b`. Only the relative pose
/// matters, so the estimate is unchanged when both poses move together.
pub fn mesh_mesh_overlap(
    a: &TriangleMesh,
    pose_a: &RigidTransform,
    b: &TriangleMesh,
    pose_b: &RigidTransform,
    n_samples: usize,
    seed: u64,
) -> f64 {
    let b_in_a = pose_a.inverse().compose(pose_b);
    let b_bounds = Aabb::from_points(b.vertices().iter().map(|v| b_in_a.transform_point(v)).collect::<Vec<_>>().iter());
    let Some(region) = a.aabb().intersection(&b_bounds) else {
        return 0.0;
    };
    let volume = region.volume();
    if volume <= 0.0 || n_samples == 0 {
        return 0.0;
    }
    let e = region.extent();
    let inside = KroneckerSequence::new(seed)
        .take(n_samples)
        .filter(|u| {
            let p = region.min + Vec3::new(u[0] * e.x, u[1] * e.y, u[2] * e.z);
            a.contains_point(&p) && b.contains_point(&b_in_a.inverse_transform_point(&p))
        })
        .count();
    volume * inside as f64 / n_samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    fn unit_cube() -> TriangleMesh {
        primitives::cuboid(Vec3::repeat(0.5))
    }

    #[test]
    fn identical_box_has_unit_iou() {
        let bx = OrientedBox::axis_aligned(Vec3::zeros(), Vec3::repeat(0.5)).unwrap();
        let o = box_mesh_overlap(&bx, &unit_cube(), &RigidTransform::identity(), 4096, 1).unwrap();
        assert!((o.iou - 1.0).abs() <= 0.02, "{o:?}");
        assert!(o.volume_reliable);
    }

    #[test]
    fn disjoint_box_is_zero() {
        let bx = OrientedBox::axis_aligned(Vec3::new(3.0, 0.0, 0.0), Vec3::repeat(0.5)).unwrap();
        let o = box_mesh_overlap(&bx, &unit_cube(), &RigidTransform::identity(), 1000, 1).unwrap();
        assert_eq!(o.overlap_volume, 0.0);
        assert_eq!(o.iou, 0.0);
    }

    #[test]
    fn enclosed_box_is_exact() {
        let bx = OrientedBox::axis_aligned(Vec3::zeros(), Vec3::repeat(0.1)).unwrap();
        let o = box_mesh_overlap(&bx, &unit_cube(), &RigidTransform::identity(), 1000, 1).unwrap();
        assert!((o.overlap_volume - 0.008).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples_rejected() {
        let bx = OrientedBox::axis_aligned(Vec3::zeros(), Vec3::repeat(0.1)).unwrap();
        assert!(box_mesh_overlap(&bx, &unit_cube(), &RigidTransform::identity(), 999, 1).is_err());
    }

    #[test]
    fn open_mesh_flagged() {
        let cube = unit_cube();
        let open = TriangleMesh::new(cube.vertices().to_vec(), cube.faces()[..10].to_vec()).unwrap();
        let bx = OrientedBox::axis_aligned(Vec3::zeros(), Vec3::repeat(0.2)).unwrap();
        let o = box_mesh_overlap(&bx, &open, &RigidTransform::identity(), 1000, 1).unwrap();
        assert!(!o.volume_reliable);
    }

    #[test]
    fn sequence_is_reproducible_and_in_unit_cube() {
        let a: Vec<_> = KroneckerSequence::new(42).take(500).collect();
        let b: Vec<_> = KroneckerSequence::new(42).take(500).collect();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|u| *u > 0.0 && *u < 1.0));
        let c: Vec<_> = KroneckerSequence::new(43).take(500).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn sat_detects_contained_and_separated_triangles() {
        let h = Vec3::repeat(1.0);
        let inside = [Vec3::new(0.1, 0.0, 0.0), Vec3::new(0.0, 0.1, 0.0), Vec3::new(0.0, 0.0, 0.1)];
        assert!(triangle_box_overlap(&inside, &h));
        let outside = [Vec3::new(2.1, 0.0, 0.0), Vec3::new(2.0, 0.1, 0.0), Vec3::new(2.0, 0.0, 0.1)];
        assert!(!triangle_box_overlap(&outside, &h));
        // Large triangle slicing through the box with all vertices outside.
        let slicing = [Vec3::new(-5.0, -5.0, 0.0), Vec3::new(5.0, -5.0, 0.0), Vec3::new(0.0, 5.0, 0.0)];
        assert!(triangle_box_overlap(&slicing, &h));
        // Diagonal triangle near a corner but separated along a cross axis.
        let corner = [Vec3::new(1.5, 1.5, -3.0), Vec3::new(1.5, 1.5, 3.0), Vec3::new(3.0, 0.5, 0.0)];
        assert!(!triangle_box_overlap(&corner, &h));
    }

    #[test]
    fn stacked_cubes_overlap_only_when_pushed_together() {
        let cube = unit_cube();
        let upper = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 1.0));
        let touching = mesh_mesh_overlap(&cube, &RigidTransform::identity(), &cube, &upper, 2000, 3);
        assert_eq!(touching, 0.0);
        let lifted = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.2));
        let v = mesh_mesh_overlap(&cube, &lifted, &cube, &upper, 4000, 3);
        assert!((v - 0.2).abs() < 0.02, "{v}");
    }
}

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bvh::{Aabb, Bvh};
use super::ray::ray_triangle;
use super::{RigidTransform, UnitVec3, Vec3};
use crate::error::{Error, Result};

/// Indexed triangle mesh with precomputed bounds, hierarchy, and volume.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    face_normals: Option<Vec<UnitVec3>>,
    bvh: Bvh,
    closed: bool,
    volume: f64,
}

/// Result of building a mesh from raw data.
#[derive(Clone, Debug)]
pub struct MeshLoad {
    pub mesh: TriangleMesh,
    pub dropped_faces: usize,
}

// Barycentric margin below which a parity ray is considered to graze an edge.
const EDGE_EPS: f64 = 1e-9;
const MAX_PARITY_RETRIES: usize = 8;

impl TriangleMesh {
    /// Builds a mesh, dropping zero-area faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        Self::build(vertices, faces, None).map(|l| l.mesh)
    }

    /// Like [`TriangleMesh::new`] but keeps optional per-face normals and
    /// reports how many faces were dropped.
    pub fn build(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        face_normals: Option<Vec<UnitVec3>>,
    ) -> Result<MeshLoad> {
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::format("non-finite vertex coordinate"));
        }
        if let Some(ns) = &face_normals {
            if ns.len() != faces.len() {
                return Err(Error::format("face normal count does not match face count"));
            }
        }
        let n = vertices.len() as u32;
        let mut kept = Vec::with_capacity(faces.len());
        let mut kept_normals = face_normals.as_ref().map(|_| Vec::new());
        let mut dropped = 0;
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&ix| ix >= n) {
                return Err(Error::format(format!(
                    "face {i} references vertex out of range ({f:?}, {n} vertices)"
                )));
            }
            if is_degenerate(&vertices, f) {
                dropped += 1;
                continue;
            }
            kept.push(*f);
            if let (Some(out), Some(src)) = (kept_normals.as_mut(), face_normals.as_ref()) {
                out.push(src[i]);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh(format!(
                "no non-degenerate faces ({} vertices, {} faces given)",
                vertices.len(),
                faces.len()
            )));
        }
        let boxes: Vec<Aabb> = kept
            .iter()
            .map(|f| Aabb::from_points(f.iter().map(|&i| &vertices[i as usize])))
            .collect();
        let bvh = Bvh::build(&boxes);
        let closed = is_closed(&kept);
        let volume = signed_volume(&vertices, &kept).abs();
        Ok(MeshLoad {
            mesh: TriangleMesh {
                vertices,
                faces: kept,
                face_normals: kept_normals,
                bvh,
                closed,
                volume,
            },
            dropped_faces: dropped,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn aabb(&self) -> Aabb {
        self.bvh.bounds()
    }

    /// True when every undirected edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Enclosed volume from the signed tetrahedron sum. Only meaningful when
    /// [`TriangleMesh::is_closed`] holds.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let f = self.faces[face];
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    /// Stored normal if present, else the winding-order normal.
    pub fn face_normal(&self, face: usize) -> UnitVec3 {
        if let Some(ns) = &self.face_normals {
            return ns[face];
        }
        let [a, b, c] = self.triangle(face);
        UnitVec3::new_normalize((b - a).cross(&(c - a)))
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Uniform scale about the mesh origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {s}")));
        }
        let vertices = self.vertices.iter().map(|v| v * s).collect();
        Self::build(vertices, self.faces.clone(), self.face_normals.clone()).map(|l| l.mesh)
    }

    pub fn transformed(&self, t: &RigidTransform) -> Self {
        let vertices = self.vertices.iter().map(|v| t.transform_point(v)).collect();
        let normals = self.face_normals.as_ref().map(|ns| {
            ns.iter()
                .map(|n| UnitVec3::new_normalize(t.transform_vector(n)))
                .collect()
        });
        Self::build(vertices, self.faces.clone(), normals)
            .expect("rigid motion preserves non-degenerate faces")
            .mesh
    }

    /// Inside test by ray parity along +x. Rays that graze an edge or vertex
    /// are restarted along a slightly perturbed direction.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        if !self.aabb().contains(p) {
            return false;
        }
        for attempt in 0..MAX_PARITY_RETRIES {
            let dir = parity_direction(attempt);
            if let Some(crossings) = self.parity_crossings(p, &dir) {
                return crossings % 2 == 1;
            }
        }
        // Every retry grazed something; fall back to the last direction's count.
        let dir = parity_direction(MAX_PARITY_RETRIES);
        let mut count = 0usize;
        self.bvh.traverse_ray(p, &dir, f64::INFINITY, |f| {
            let [a, b, c] = self.triangle(f);
            if let Some(h) = ray_triangle(p, &dir, &a, &b, &c) {
                if h.t > 0.0 {
                    count += 1;
                }
            }
            f64::INFINITY
        });
        count % 2 == 1
    }

    fn parity_crossings(&self, p: &Vec3, dir: &Vec3) -> Option<usize> {
        let mut count = 0usize;
        let mut degenerate = false;
        self.bvh.traverse_ray(p, dir, f64::INFINITY, |f| {
            if degenerate {
                return f64::NEG_INFINITY;
            }
            let [a, b, c] = self.triangle(f);
            if let Some(h) = ray_triangle(p, dir, &a, &b, &c) {
                if h.t > 0.0 {
                    let w = 1.0 - h.u - h.v;
                    if h.u < EDGE_EPS || h.v < EDGE_EPS || w < EDGE_EPS {
                        degenerate = true;
                        return f64::NEG_INFINITY;
                    }
                    count += 1;
                }
            }
            f64::INFINITY
        });
        (!degenerate).then_some(count)
    }

    /// Area-weighted surface samples with the face each one came from.
    pub fn sample_surface(&self, n: usize, seed: u64) -> Vec<(Vec3, usize)> {
        let mut cumulative = Vec::with_capacity(self.faces.len());
        let mut total = 0.0;
        for f in 0..self.faces.len() {
            total += self.face_area(f);
            cumulative.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let r: f64 = rng.gen::<f64>() * total;
                let face = cumulative
                    .partition_point(|&c| c <= r)
                    .min(self.faces.len() - 1);
                let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
                if s + t > 1.0 {
                    s = 1.0 - s;
                    t = 1.0 - t;
                }
                let [a, b, c] = self.triangle(face);
                (a + (b - a) * s + (c - a) * t, face)
            })
            .collect()
    }
}

fn parity_direction(attempt: usize) -> Vec3 {
    if attempt == 0 {
        return Vec3::x();
    }
    // Deterministic small tilts; irrational multipliers keep them distinct.
    let k = attempt as f64;
    let dy = 1e-3 * ((k * 0.754_877_666_246_692_7).fract() - 0.5);
    let dz = 1e-3 * ((k * 0.569_840_290_998_053_3).fract() - 0.5);
    Vec3::new(1.0, dy, dz).normalize()
}

fn is_degenerate(vertices: &[Vec3], f: &[u32; 3]) -> bool {
    let a = vertices[f[0] as usize];
    let b = vertices[f[1] as usize];
    let c = vertices[f[2] as usize];
    let longest = (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared());
    let area2 = (b - a).cross(&(c - a)).norm();
    longest == 0.0 || area2 <= 1e-12 * longest
}

fn is_closed(faces: &[[u32; 3]]) -> bool {
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for f in faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    edges.values().all(|&c| c == 2)
}

fn signed_volume(vertices: &[Vec3], faces: &[[u32; 3]]) -> f64 {
    faces
        .iter()
        .map(|f| {
            let a = vertices[f[0] as usize];
            let b = vertices[f[1] as usize];
            let c = vertices[f[2] as usize];
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn cube_volume_and_closure() {
        let cube = primitives::cuboid(Vec3::repeat(0.5));
        assert!(cube.is_closed());
        assert!((cube.volume() - 1.0).abs() < 1e-12);
        assert_eq!(cube.faces().len(), 12);
    }

    #[test]
    fn degenerate_face_is_dropped() {
        let cube = primitives::cuboid(Vec3::repeat(0.5));
        let mut faces = cube.faces().to_vec();
        faces.push([0, 0, 1]);
        let load = TriangleMesh::build(cube.vertices().to_vec(), faces, None).unwrap();
        assert_eq!(load.dropped_faces, 1);
        assert_eq!(load.mesh.faces().len(), 12);
    }

    #[test]
    fn open_mesh_detected() {
        let cube = primitives::cuboid(Vec3::repeat(0.5));
        let faces = cube.faces()[..11].to_vec();
        let m = TriangleMesh::new(cube.vertices().to_vec(), faces).unwrap();
        assert!(!m.is_closed());
    }

    #[test]
    fn out_of_range_index_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(TriangleMesh::new(v, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn parity_inside_test_on_cube() {
        let cube = primitives::cuboid(Vec3::repeat(0.5));
        assert!(cube.contains_point(&Vec3::new(0.1, 0.2, -0.3)));
        // Ray from the center along +x passes through the face diagonal edge.
        assert!(cube.contains_point(&Vec3::zeros()));
        assert!(!cube.contains_point(&Vec3::new(0.6, 0.0, 0.0)));
        assert!(!cube.contains_point(&Vec3::new(-0.7, 0.0, 0.0)));
    }

    #[test]
    fn surface_samples_lie_on_faces() {
        let cube = primitives::cuboid(Vec3::repeat(0.5));
        for (p, _) in cube.sample_surface(200, 7) {
            let m = p.x.abs().max(p.y.abs()).max(p.z.abs());
            assert!((m - 0.5).abs() < 1e-12);
        }
    }
}

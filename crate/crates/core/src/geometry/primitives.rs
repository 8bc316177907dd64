//! Closed, outward-wound primitive meshes centered at the origin.

use std::f64::consts::PI;

use super::{TriangleMesh, Vec3};

pub fn cuboid(half_extents: Vec3) -> TriangleMesh {
    let h = half_extents;
    let vertices: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriangleMesh::new(vertices, faces).expect("cuboid is well formed")
}

/// Cylinder along z with `segments` sides.
pub fn cylinder(radius: f64, half_height: f64, segments: usize) -> TriangleMesh {
    let segments = segments.max(3);
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for k in 0..segments {
        let t = 2.0 * PI * k as f64 / segments as f64;
        let (s, c) = t.sin_cos();
        vertices.push(Vec3::new(radius * c, radius * s, -half_height));
        vertices.push(Vec3::new(radius * c, radius * s, half_height));
    }
    let bottom = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, -half_height));
    let top = bottom + 1;
    vertices.push(Vec3::new(0.0, 0.0, half_height));
    let mut faces = Vec::with_capacity(4 * segments);
    for k in 0..segments as u32 {
        let n = (k + 1) % segments as u32;
        let (b0, t0, b1, t1) = (2 * k, 2 * k + 1, 2 * n, 2 * n + 1);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
        faces.push([bottom, b1, b0]);
        faces.push([top, t0, t1]);
    }
    TriangleMesh::new(vertices, faces).expect("cylinder is well formed")
}

/// Latitude/longitude sphere with `segments` meridians and `rings` bands.
pub fn uv_sphere(radius: f64, segments: usize, rings: usize) -> TriangleMesh {
    let segments = segments.max(3);
    let rings = rings.max(2);
    let mut vertices = vec![Vec3::new(0.0, 0.0, radius)];
    for r in 1..rings {
        let polar = PI * r as f64 / rings as f64;
        let (sp, cp) = polar.sin_cos();
        for s in 0..segments {
            let az = 2.0 * PI * s as f64 / segments as f64;
            let (sa, ca) = az.sin_cos();
            vertices.push(Vec3::new(radius * sp * ca, radius * sp * sa, radius * cp));
        }
    }
    let south = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, -radius));
    let seg = segments as u32;
    let ring_start = |r: u32| 1 + (r - 1) * seg;
    let mut faces = Vec::new();
    for s in 0..seg {
        let n = (s + 1) % seg;
        faces.push([0, ring_start(1) + s, ring_start(1) + n]);
    }
    for r in 1..(rings as u32 - 1) {
        let a = ring_start(r);
        let b = ring_start(r + 1);
        for s in 0..seg {
            let n = (s + 1) % seg;
            faces.push([a + s, b + s, b + n]);
            faces.push([a + s, b + n, a + n]);
        }
    }
    let last = ring_start(rings as u32 - 1);
    for s in 0..seg {
        let n = (s + 1) % seg;
        faces.push([south, last + n, last + s]);
    }
    TriangleMesh::new(vertices, faces).expect("sphere is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_outward(m: &TriangleMesh) {
        for f in 0..m.faces().len() {
            let [a, b, c] = m.triangle(f);
            let centroid = (a + b + c) / 3.0;
            assert!(m.face_normal(f).dot(&centroid) > 0.0, "face {f} points inward");
        }
    }

    #[test]
    fn primitives_closed_and_outward() {
        for m in [
            cuboid(Vec3::new(0.1, 0.2, 0.3)),
            cylinder(0.05, 0.1, 24),
            uv_sphere(0.04, 24, 12),
        ] {
            assert!(m.is_closed());
            assert_outward(&m);
        }
    }

    #[test]
    fn volumes_converge_to_analytic() {
        let c = cylinder(1.0, 1.0, 256);
        assert!((c.volume() - 2.0 * PI).abs() / (2.0 * PI) < 1e-3);
        let s = uv_sphere(1.0, 128, 64);
        assert!((s.volume() - 4.0 / 3.0 * PI).abs() / (4.0 / 3.0 * PI) < 2e-3);
        let b = cuboid(Vec3::new(0.1, 0.2, 0.3));
        assert!((b.volume() - 0.048).abs() < 1e-15);
    }
}

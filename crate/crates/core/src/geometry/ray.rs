use serde::{Deserialize, Serialize};

use super::{Scene, TriangleMesh, UnitVec3, Vec3};

/// Parametric hit on a single triangle: `origin + t * dir`, barycentrics `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleHit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

/// Möller–Trumbore with inclusive edges. Rays parallel to the plane miss.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<TriangleHit> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    Some(TriangleHit { t, u, v })
}

/// Nearest ray hit in a scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub distance: f64,
    pub instance_id: u32,
    pub face: usize,
    pub normal: UnitVec3,
}

/// Nearest hit of a ray against one mesh in its local frame, as `(t, face)`.
/// Ties in `t` go to the lowest face index.
pub(crate) fn nearest_on_mesh(
    mesh: &TriangleMesh,
    origin: &Vec3,
    dir: &Vec3,
    max_t: f64,
    accept: impl Fn(usize) -> bool,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    mesh.bvh().traverse_ray(origin, dir, max_t, |f| {
        let [a, b, c] = mesh.triangle(f);
        if let Some(h) = ray_triangle(origin, dir, &a, &b, &c) {
            if h.t >= 0.0 && h.t <= max_t && accept(f) {
                let better = match best {
                    None => true,
                    Some((bt, bf)) => h.t < bt || (h.t == bt && f < bf),
                };
                if better {
                    best = Some((h.t, f));
                }
            }
        }
        // Keep equal-distance faces reachable for the tie-break.
        best.map_or(max_t, |(t, _)| t)
    });
    best
}

/// Nearest intersection along `dir` within `max_dist`. Ties in distance go to
/// the earlier scene object, then the lower face index.
pub fn ray_cast(scene: &Scene, origin: &Vec3, dir: &UnitVec3, max_dist: f64) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for obj in scene.objects() {
        let local_origin = obj.pose.inverse_transform_point(origin);
        let local_dir = obj.pose.inverse_transform_vector(dir);
        let limit = best.map_or(max_dist, |h| h.distance);
        if let Some((t, face)) = nearest_on_mesh(&obj.mesh, &local_origin, &local_dir, limit, |_| true) {
            if best.is_none_or(|h| t < h.distance) {
                let n = obj.pose.transform_vector(&obj.mesh.face_normal(face));
                best = Some(Hit {
                    distance: t,
                    instance_id: obj.instance_id,
                    face,
                    normal: UnitVec3::new_normalize(n),
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, RigidTransform, SceneObject, TriangleMesh};
    use std::sync::Arc;

    fn cube_scene() -> Scene {
        let cube = Arc::new(primitives::cuboid(Vec3::repeat(0.5)));
        Scene::new(vec![SceneObject::new(cube, RigidTransform::identity(), 0)]).unwrap()
    }

    #[test]
    fn hits_top_face_of_unit_cube() {
        let scene = cube_scene();
        let dir = UnitVec3::new_normalize(Vec3::new(0.0, 0.0, -1.0));
        let hit = ray_cast(&scene, &Vec3::new(0.0, 0.0, 2.0), &dir, 10.0).unwrap();
        assert_eq!(hit.distance, 1.5);
        assert_eq!(hit.normal.into_inner(), Vec3::z());
    }

    #[test]
    fn miss_when_pointing_away() {
        let scene = cube_scene();
        let dir = UnitVec3::new_normalize(Vec3::new(0.0, 0.0, 1.0));
        assert!(ray_cast(&scene, &Vec3::new(0.0, 0.0, 2.0), &dir, 10.0).is_none());
    }

    #[test]
    fn respects_max_distance() {
        let scene = cube_scene();
        let dir = UnitVec3::new_normalize(Vec3::new(0.0, 0.0, -1.0));
        assert!(ray_cast(&scene, &Vec3::new(0.0, 0.0, 2.0), &dir, 1.4).is_none());
        assert!(ray_cast(&scene, &Vec3::new(0.0, 0.0, 2.0), &dir, 1.5).is_some());
    }

    #[test]
    fn shared_edge_reports_single_lowest_face() {
        // Two coplanar triangles sharing the edge from (0,0,0) to (1,1,0).
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let mesh = TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        // Sanity: the probe point lies on both triangles.
        let o = Vec3::new(0.5, 0.5, 1.0);
        let d = Vec3::new(0.0, 0.0, -1.0);
        for f in 0..2 {
            let [a, b, c] = mesh.triangle(f);
            assert!(ray_triangle(&o, &d, &a, &b, &c).is_some());
        }
        let scene = Scene::new(vec![SceneObject::new(
            Arc::new(mesh),
            RigidTransform::identity(),
            4,
        )])
        .unwrap();
        let hit = ray_cast(&scene, &o, &UnitVec3::new_normalize(d), 5.0).unwrap();
        assert_eq!(hit.face, 0);
        assert_eq!(hit.distance, 1.0);
        assert_eq!(hit.instance_id, 4);
    }
}

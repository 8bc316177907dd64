//! A small three-object desk scene: a box, a cylinder and a sphere resting on
//! the z = 0 plane.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::Result;
use crate::geometry::io::write_obj;
use crate::geometry::{primitives, RigidTransform, Scene, SceneDescription, SceneObject, SceneObjectDesc, TriangleMesh, Vec3};

fn parts() -> Vec<(&'static str, TriangleMesh, Vec3, u32)> {
    vec![
        ("box.obj", primitives::cuboid(Vec3::new(0.025, 0.025, 0.025)), Vec3::new(0.0, 0.0, 0.025), 1),
        ("cylinder.obj", primitives::cylinder(0.025, 0.05, 32), Vec3::new(0.15, 0.0, 0.05), 2),
        ("sphere.obj", primitives::uv_sphere(0.03, 32, 16), Vec3::new(0.0, 0.15, 0.03), 3),
    ]
}

pub fn desk_scene() -> Scene {
    let objects = parts()
        .into_iter()
        .map(|(_, mesh, at, id)| SceneObject::new(Arc::new(mesh), RigidTransform::from_translation(at), id))
        .collect();
    Scene::new(objects).expect("instance ids are distinct")
}

/// Writes the meshes and `scene.json` into `dir`; returns the scene path.
pub fn write_desk_scene(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut objects = Vec::new();
    for (name, mesh, at, id) in parts() {
        write_obj(&dir.join(name), &mesh)?;
        objects.push(SceneObjectDesc {
            mesh: name.to_owned(),
            pose: RigidTransform::from_translation(at),
            scale: 1.0,
            instance_id: id,
        });
    }
    let path = dir.join("scene.json");
    let text = serde_json::to_string_pretty(&SceneDescription { objects })
        .map_err(|e| crate::Error::format(e.to_string()))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

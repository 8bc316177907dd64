use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bvh::Aabb;
use super::{io, RigidTransform, TriangleMesh, Vec3};
use crate::error::{Error, Result};

/// JSON scene document as stored on disk.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDescription {
    pub objects: Vec<SceneObjectDesc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObjectDesc {
    pub mesh: String,
    pub pose: RigidTransform,
    #[serde(default = "unit_scale")]
    pub scale: f64,
    pub instance_id: u32,
}

fn unit_scale() -> f64 {
    1.0
}

impl SceneDescription {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
            path: path.to_owned(),
            source,
        })?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::format(format!("{}: {} at `{}`", path.display(), e.inner(), e.path())))
    }
}

/// A posed, scaled mesh. `mesh` already has the scale baked in.
#[derive(Clone, Debug)]
pub struct SceneObject {
    pub source: Option<String>,
    pub mesh: Arc<TriangleMesh>,
    pub pose: RigidTransform,
    pub scale: f64,
    pub instance_id: u32,
    world_aabb: Aabb,
}

impl SceneObject {
    pub fn new(mesh: Arc<TriangleMesh>, pose: RigidTransform, instance_id: u32) -> Self {
        let world_aabb = world_bounds(&mesh, &pose);
        Self {
            source: None,
            mesh,
            pose,
            scale: 1.0,
            instance_id,
            world_aabb,
        }
    }

    /// Scales `mesh` about its origin before posing it.
    pub fn scaled(mesh: &TriangleMesh, pose: RigidTransform, scale: f64, instance_id: u32) -> Result<Self> {
        let mesh = if scale == 1.0 {
            mesh.clone()
        } else {
            mesh.scaled(scale)?
        };
        let mut obj = Self::new(Arc::new(mesh), pose, instance_id);
        obj.scale = scale;
        Ok(obj)
    }

    pub fn world_aabb(&self) -> Aabb {
        self.world_aabb
    }

    /// Same object moved by `t` in the world frame.
    pub fn moved(&self, t: &RigidTransform) -> Self {
        let pose = t.compose(&self.pose);
        Self {
            world_aabb: world_bounds(&self.mesh, &pose),
            pose,
            ..self.clone()
        }
    }
}

fn world_bounds(mesh: &TriangleMesh, pose: &RigidTransform) -> Aabb {
    Aabb::from_points(mesh.vertices().iter().map(|v| pose.transform_point(v)).collect::<Vec<_>>().iter())
}

/// Loaded scene ready for queries.
#[derive(Clone, Debug, Default)]
pub struct Scene {
    objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self> {
        let mut seen = HashSet::new();
        for o in &objects {
            if !seen.insert(o.instance_id) {
                return Err(Error::invalid(format!(
                    "duplicate instance id {} in scene",
                    o.instance_id
                )));
            }
        }
        Ok(Self { objects })
    }

    /// Loads meshes referenced by `desc`; relative paths resolve against `base_dir`.
    pub fn from_description(desc: &SceneDescription, base_dir: &Path) -> Result<Self> {
        let mut cache: HashMap<PathBuf, Arc<TriangleMesh>> = HashMap::new();
        let mut objects = Vec::with_capacity(desc.objects.len());
        for o in &desc.objects {
            let path = base_dir.join(&o.mesh);
            let raw = match cache.get(&path) {
                Some(m) => m.clone(),
                None => {
                    let m = Arc::new(io::load_mesh(&path)?.mesh);
                    cache.insert(path.clone(), m.clone());
                    m
                }
            };
            let mut obj = if o.scale == 1.0 {
                SceneObject::new(raw, o.pose, o.instance_id)
            } else {
                SceneObject::scaled(&raw, o.pose, o.scale, o.instance_id)?
            };
            obj.source = Some(o.mesh.clone());
            objects.push(obj);
        }
        Self::new(objects)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let desc = SceneDescription::read(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_description(&desc, base)
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn object(&self, instance_id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.instance_id == instance_id)
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Every object moved by the same world-frame transform.
    pub fn moved(&self, t: &RigidTransform) -> Self {
        Self {
            objects: self.objects.iter().map(|o| o.moved(t)).collect(),
        }
    }

    pub fn bounds(&self) -> Aabb {
        self.objects
            .iter()
            .fold(Aabb::empty(), |acc, o| acc.union(&o.world_aabb))
    }

    pub fn centroid(&self) -> Vec3 {
        let b = self.bounds();
        (b.min + b.max) * 0.5
    }
}

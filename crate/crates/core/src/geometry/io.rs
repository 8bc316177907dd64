//! Mesh and point-cloud file formats.
//!
//! Meshes load from OBJ or PLY (ASCII or binary). Point clouds round-trip
//! through binary little-endian PLY with `x y z nx ny nz` floats and an
//! optional `uint instance_id`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ply_rs::parser::Parser;
use ply_rs::ply::{
    Addable, DefaultElement, ElementDef, Encoding, Ply, Property, PropertyDef, PropertyType,
    ScalarType,
};
use ply_rs::writer::Writer;

use super::{MeshLoad, PointCloud, TriangleMesh, UnitVec3, Vec3};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::UnreadableFile {
        path: path.to_owned(),
        source,
    })
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Loads an OBJ or PLY triangle mesh; polygons are fan-triangulated and
/// zero-area faces dropped.
pub fn load_mesh(path: &Path) -> Result<MeshLoad> {
    let file = open(path)?;
    let (vertices, faces) = match extension(path).as_str() {
        "obj" => read_obj(path)?,
        "ply" => read_ply_mesh(file)?,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: extension `{other}` (expected obj or ply)",
                path.display()
            )))
        }
    };
    if faces.is_empty() {
        return Err(Error::EmptyMesh(path.display().to_string()));
    }
    TriangleMesh::build(vertices, faces, None).map_err(|e| match e {
        Error::EmptyMesh(m) => Error::EmptyMesh(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_obj(path: &Path) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: false,
        ignore_points: true,
        ignore_lines: true,
    };
    let (models, _) = tobj::load_obj(path, &opts)
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for model in models {
        let m = model.mesh;
        let base = vertices.len() as u32;
        vertices.extend(
            m.positions
                .chunks_exact(3)
                .map(|c| Vec3::new(c[0], c[1], c[2])),
        );
        faces.extend(
            m.indices
                .chunks_exact(3)
                .map(|t| [base + t[0], base + t[1], base + t[2]]),
        );
    }
    Ok((vertices, faces))
}

fn read_ply(file: File) -> Result<Ply<DefaultElement>> {
    let mut reader = BufReader::new(file);
    Parser::<DefaultElement>::new()
        .read_ply(&mut reader)
        .map_err(|e| Error::format(format!("ply: {e}")))
}

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        _ => return None,
    })
}

fn index_list(p: &Property) -> Option<Vec<i64>> {
    Some(match p {
        Property::ListChar(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUChar(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListShort(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUShort(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListInt(v) => v.iter().map(|&x| x as i64).collect(),
        Property::ListUInt(v) => v.iter().map(|&x| x as i64).collect(),
        _ => return None,
    })
}

fn get_scalar(e: &DefaultElement, key: &str) -> Result<f64> {
    e.get(key)
        .and_then(scalar)
        .ok_or_else(|| Error::format(format!("ply: missing or non-scalar property `{key}`")))
}

fn read_positions(ply: &Ply<DefaultElement>) -> Result<Vec<Vec3>> {
    let verts = ply
        .payload
        .get("vertex")
        .ok_or_else(|| Error::format("ply: no `vertex` element"))?;
    verts
        .iter()
        .map(|v| {
            Ok(Vec3::new(
                get_scalar(v, "x")?,
                get_scalar(v, "y")?,
                get_scalar(v, "z")?,
            ))
        })
        .collect()
}

fn read_ply_mesh(file: File) -> Result<(Vec<Vec3>, Vec<[u32; 3]>)> {
    let ply = read_ply(file)?;
    let vertices = read_positions(&ply)?;
    let mut faces = Vec::new();
    for f in ply.payload.get("face").map(Vec::as_slice).unwrap_or_default() {
        let idx = f
            .get("vertex_indices")
            .or_else(|| f.get("vertex_index"))
            .and_then(index_list)
            .ok_or_else(|| Error::format("ply: face without vertex_indices list"))?;
        if idx.iter().any(|&i| i < 0) {
            return Err(Error::format("ply: negative vertex index"));
        }
        for k in 1..idx.len().saturating_sub(1) {
            faces.push([idx[0] as u32, idx[k] as u32, idx[k + 1] as u32]);
        }
    }
    Ok((vertices, faces))
}

/// Reads a point cloud; normals and instance labels are picked up when present.
pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let ply = read_ply(open(path)?)
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
    let points = read_positions(&ply)?;
    let verts = &ply.payload["vertex"];
    let def = &ply.header.elements["vertex"];
    let mut cloud = PointCloud::new(points);
    if ["nx", "ny", "nz"].iter().all(|k| def.properties.contains_key(*k)) {
        let normals = verts
            .iter()
            .map(|v| {
                let n = Vec3::new(
                    get_scalar(v, "nx")?,
                    get_scalar(v, "ny")?,
                    get_scalar(v, "nz")?,
                );
                let len = n.norm();
                if !(len > 0.0) {
                    return Err(Error::format("ply: zero-length normal"));
                }
                Ok(UnitVec3::new_normalize(n))
            })
            .collect::<Result<Vec<_>>>()?;
        cloud = cloud.with_normals(normals)?;
    }
    if def.properties.contains_key("instance_id") {
        let labels = verts
            .iter()
            .map(|v| match v.get("instance_id") {
                Some(Property::UInt(l)) => Ok(*l),
                Some(p) => scalar(p)
                    .filter(|x| *x >= 0.0 && x.fract() == 0.0 && *x <= u32::MAX as f64)
                    .map(|x| x as u32)
                    .ok_or_else(|| Error::format("ply: invalid instance_id")),
                None => Err(Error::format("ply: missing instance_id")),
            })
            .collect::<Result<Vec<_>>>()?;
        cloud = cloud.with_labels(labels)?;
    }
    Ok(cloud)
}

/// Writes a binary little-endian PLY point cloud.
pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut ply = Ply::<DefaultElement>::new();
    ply.header.encoding = Encoding::BinaryLittleEndian;
    let mut def = ElementDef::new("vertex".to_string());
    let float = PropertyType::Scalar(ScalarType::Float);
    let mut names = vec!["x", "y", "z"];
    if cloud.normals.is_some() {
        names.extend(["nx", "ny", "nz"]);
    }
    for n in &names {
        def.properties.add(PropertyDef::new(n.to_string(), float.clone()));
    }
    if cloud.instance_labels.is_some() {
        def.properties.add(PropertyDef::new(
            "instance_id".to_string(),
            PropertyType::Scalar(ScalarType::UInt),
        ));
    }
    ply.header.elements.add(def);
    let elements = (0..cloud.len())
        .map(|i| {
            let mut e = DefaultElement::new();
            let p = cloud.points[i];
            e.insert("x".into(), Property::Float(p.x as f32));
            e.insert("y".into(), Property::Float(p.y as f32));
            e.insert("z".into(), Property::Float(p.z as f32));
            if let Some(ns) = &cloud.normals {
                let n = ns[i];
                e.insert("nx".into(), Property::Float(n.x as f32));
                e.insert("ny".into(), Property::Float(n.y as f32));
                e.insert("nz".into(), Property::Float(n.z as f32));
            }
            if let Some(ls) = &cloud.instance_labels {
                e.insert("instance_id".into(), Property::UInt(ls[i]));
            }
            e
        })
        .collect();
    ply.payload.insert("vertex".to_string(), elements);
    ply.make_consistent()
        .map_err(|e| Error::invariant(format!("ply: {e:?}")))?;
    let mut out = BufWriter::new(File::create(path)?);
    Writer::new()
        .write_ply(&mut out, &mut ply)
        .map_err(Error::Io)?;
    out.flush()?;
    Ok(())
}

/// Writes a mesh as ASCII OBJ (positions and triangular faces only).
pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    out.flush()?;
    Ok(())
}

/// ASCII PLY of labelled points, for visual inspection of lattices and grasps.
pub fn write_marker_ply(path: &Path, points: &[Vec3], labels: &[u32]) -> Result<()> {
    let cloud = PointCloud::new(points.to_vec()).with_labels(labels.to_vec())?;
    write_point_cloud(path, &cloud)
}

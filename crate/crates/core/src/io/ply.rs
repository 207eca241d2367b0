//! ASCII PLY reader/writer for point clouds and triangle meshes.
//!
//! Vertices carry `x y z`, optionally `nx ny nz` (unit normals) and
//! optionally `source_frame` (observing keyframe id). Faces are triangles
//! (`vertex_indices` lists of length 3). Floats are written in shortest
//! round-trip form, so write/read cycles are bit-exact. Parsers reject
//! NaN/Inf and count mismatches with the offending line number.

use nalgebra::{Point3, Unit, Vector3};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::Real;

/// How far a parsed normal/quaternion may deviate from unit length before it
/// is rejected instead of renormalized.
const UNIT_REJECT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VertexColumn {
    X,
    Y,
    Z,
    Nx,
    Ny,
    Nz,
    SourceFrame,
    Ignored,
}

struct Header {
    vertex_count: usize,
    face_count: usize,
    columns: Vec<VertexColumn>,
    has_normals: bool,
    has_frames: bool,
    body_start_line: usize,
}

fn parse_header(path: &Path, lines: &[&str]) -> Result<Header> {
    let err = |line: usize, msg: &str| Error::parse(path, line + 1, msg);
    if lines.is_empty() || lines[0].trim() != "ply" {
        return Err(err(0, "missing `ply` magic"));
    }
    let mut vertex_count = None;
    let mut face_count = 0usize;
    let mut columns = Vec::new();
    let mut current_element = "";
    let mut format_seen = false;
    let mut i = 1;
    while i < lines.len() {
        let line = lines[i].trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(err(i, &format!("unsupported format `{kind}` (ascii only)")));
                }
                format_seen = true;
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tokens.next().unwrap_or("");
                let count: usize = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(i, "element without a valid count"))?;
                match name {
                    "vertex" => vertex_count = Some(count),
                    "face" => face_count = count,
                    _ => {}
                }
                current_element = match name {
                    "vertex" => "vertex",
                    "face" => "face",
                    _ => "other",
                };
            }
            Some("property") => {
                if current_element == "vertex" {
                    let rest: Vec<&str> = tokens.collect();
                    if rest.first() == Some(&"list") {
                        return Err(err(i, "list property on vertex element is not supported"));
                    }
                    let name = *rest.last().ok_or_else(|| err(i, "property without a name"))?;
                    columns.push(match name {
                        "x" => VertexColumn::X,
                        "y" => VertexColumn::Y,
                        "z" => VertexColumn::Z,
                        "nx" => VertexColumn::Nx,
                        "ny" => VertexColumn::Ny,
                        "nz" => VertexColumn::Nz,
                        "source_frame" => VertexColumn::SourceFrame,
                        _ => VertexColumn::Ignored,
                    });
                }
            }
            Some("end_header") => {
                if !format_seen {
                    return Err(err(i, "missing `format` line"));
                }
                let vertex_count =
                    vertex_count.ok_or_else(|| err(i, "missing `element vertex` declaration"))?;
                for required in [VertexColumn::X, VertexColumn::Y, VertexColumn::Z] {
                    if !columns.contains(&required) {
                        return Err(err(i, "vertex element must declare x, y and z"));
                    }
                }
                let has_normals = columns.contains(&VertexColumn::Nx);
                if has_normals
                    && !(columns.contains(&VertexColumn::Ny)
                        && columns.contains(&VertexColumn::Nz))
                {
                    return Err(err(i, "normals must declare all of nx, ny, nz"));
                }
                let has_frames = columns.contains(&VertexColumn::SourceFrame);
                return Ok(Header {
                    vertex_count,
                    face_count,
                    columns,
                    has_normals,
                    has_frames,
                    body_start_line: i + 1,
                });
            }
            Some(other) => return Err(err(i, &format!("unexpected header token `{other}`"))),
            None => {}
        }
        i += 1;
    }
    Err(err(lines.len().saturating_sub(1), "missing `end_header`"))
}

struct ParsedBody<R: Real> {
    cloud: PointCloud<R>,
    triangles: Vec<[u32; 3]>,
}

fn parse_body<R: Real>(path: &Path, text: &str) -> Result<ParsedBody<R>> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(path, &lines)?;
    let err = |line: usize, msg: String| Error::parse(path, line + 1, msg);

    let mut points = Vec::with_capacity(header.vertex_count);
    let mut normals = header.has_normals.then(Vec::new);
    let mut frames = header.has_frames.then(Vec::new);

    let mut line_no = header.body_start_line;
    let next_data_line = |line_no: &mut usize| -> Option<(usize, &str)> {
        while *line_no < lines.len() {
            let idx = *line_no;
            *line_no += 1;
            let l = lines[idx].trim();
            if !l.is_empty() {
                return Some((idx, l));
            }
        }
        None
    };

    for _ in 0..header.vertex_count {
        let (idx, line) = next_data_line(&mut line_no).ok_or_else(|| {
            err(
                lines.len().saturating_sub(1),
                format!("expected {} vertex lines, file ended early", header.vertex_count),
            )
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != header.columns.len() {
            return Err(err(
                idx,
                format!(
                    "vertex line has {} fields, header declares {}",
                    fields.len(),
                    header.columns.len()
                ),
            ));
        }
        let mut pos = [0.0f64; 3];
        let mut nrm = [0.0f64; 3];
        let mut frame = 0u32;
        for (field, column) in fields.iter().zip(&header.columns) {
            match column {
                VertexColumn::Ignored => {}
                VertexColumn::SourceFrame => {
                    frame = field
                        .parse::<u32>()
                        .map_err(|_| err(idx, format!("invalid source_frame `{field}`")))?;
                }
                _ => {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| err(idx, format!("invalid number `{field}`")))?;
                    if !v.is_finite() {
                        return Err(err(idx, format!("non-finite value `{field}`")));
                    }
                    match column {
                        VertexColumn::X => pos[0] = v,
                        VertexColumn::Y => pos[1] = v,
                        VertexColumn::Z => pos[2] = v,
                        VertexColumn::Nx => nrm[0] = v,
                        VertexColumn::Ny => nrm[1] = v,
                        VertexColumn::Nz => nrm[2] = v,
                        _ => unreachable!(),
                    }
                }
            }
        }
        points.push(Point3::new(
            R::of_f64(pos[0]),
            R::of_f64(pos[1]),
            R::of_f64(pos[2]),
        ));
        if let Some(ns) = normals.as_mut() {
            let v = Vector3::new(nrm[0], nrm[1], nrm[2]);
            let norm = v.norm();
            if !norm.is_finite() || (norm - 1.0).abs() > UNIT_REJECT_TOL {
                return Err(err(idx, format!("normal is not unit length (norm {norm})")));
            }
            ns.push(Unit::new_normalize(Vector3::new(
                R::of_f64(nrm[0]),
                R::of_f64(nrm[1]),
                R::of_f64(nrm[2]),
            )));
        }
        if let Some(fs) = frames.as_mut() {
            fs.push(frame);
        }
    }

    let mut triangles = Vec::with_capacity(header.face_count);
    for _ in 0..header.face_count {
        let (idx, line) = next_data_line(&mut line_no).ok_or_else(|| {
            err(
                lines.len().saturating_sub(1),
                format!("expected {} face lines, file ended early", header.face_count),
            )
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let count: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| err(idx, "face line missing vertex count".into()))?;
        if count != 3 || fields.len() != 4 {
            return Err(err(idx, format!("only triangles supported, got {count} indices")));
        }
        let mut tri = [0u32; 3];
        for (slot, f) in tri.iter_mut().zip(&fields[1..]) {
            let v: u32 = f
                .parse()
                .map_err(|_| err(idx, format!("invalid vertex index `{f}`")))?;
            if v as usize >= points.len() {
                return Err(err(idx, format!("vertex index {v} out of range")));
            }
            *slot = v;
        }
        tri
            .iter()
            .enumerate()
            .try_for_each(|(a, &va)| {
                if tri.iter().skip(a + 1).any(|&vb| vb == va) {
                    Err(err(idx, "degenerate face (repeated vertex index)".into()))
                } else {
                    Ok(())
                }
            })?;
        triangles.push(tri);
    }

    if next_data_line(&mut line_no).is_some() {
        return Err(err(line_no - 1, "trailing data after declared elements".into()));
    }

    Ok(ParsedBody {
        cloud: PointCloud {
            points,
            normals,
            source_frames: frames,
        },
        triangles,
    })
}

pub fn read_point_cloud<R: Real>(path: impl AsRef<Path>) -> Result<PointCloud<R>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_body(path, &text)?.cloud)
}

pub fn read_triangle_mesh<R: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<R>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let body = parse_body::<R>(path, &text)?;
    Ok(TriangleMesh::new(body.cloud.points, body.triangles))
}

fn render_ply<R: Real>(
    cloud: &PointCloud<R>,
    triangles: &[[u32; 3]],
    quality: Option<&[R]>,
) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\ncomment depthforge\n");
    let _ = writeln!(s, "element vertex {}", cloud.points.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.normals.is_some() {
        s.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    if cloud.source_frames.is_some() {
        s.push_str("property uint source_frame\n");
    }
    if quality.is_some() {
        s.push_str("property double quality\n");
    }
    let _ = writeln!(s, "element face {}", triangles.len());
    s.push_str("property list uchar uint vertex_indices\nend_header\n");
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(s, "{} {} {}", p.x.f64(), p.y.f64(), p.z.f64());
        if let Some(ns) = &cloud.normals {
            let n = ns[i].as_ref();
            let _ = write!(s, " {} {} {}", n.x.f64(), n.y.f64(), n.z.f64());
        }
        if let Some(fs) = &cloud.source_frames {
            let _ = write!(s, " {}", fs[i]);
        }
        if let Some(q) = quality {
            let _ = write!(s, " {}", q[i].f64());
        }
        s.push('\n');
    }
    for t in triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn write_point_cloud<R: Real>(path: impl AsRef<Path>, cloud: &PointCloud<R>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_ply(cloud, &[], None)).map_err(|e| Error::io(path, e))
}

pub fn write_triangle_mesh<R: Real>(path: impl AsRef<Path>, mesh: &TriangleMesh<R>) -> Result<()> {
    let path = path.as_ref();
    let cloud = PointCloud {
        points: mesh.vertices.clone(),
        normals: None,
        source_frames: None,
    };
    fs::write(path, render_ply(&cloud, &mesh.triangles, None)).map_err(|e| Error::io(path, e))
}

/// Mesh writer with a per-vertex scalar `quality` property, used for signed
/// distance visualization.
pub fn write_mesh_with_quality<R: Real>(
    path: impl AsRef<Path>,
    mesh: &TriangleMesh<R>,
    quality: &[R],
) -> Result<()> {
    let path = path.as_ref();
    if quality.len() != mesh.vertices.len() {
        return Err(Error::invalid_parameter(
            "quality",
            format!(
                "length {} does not match vertex count {}",
                quality.len(),
                mesh.vertices.len()
            ),
        ));
    }
    let cloud = PointCloud {
        points: mesh.vertices.clone(),
        normals: None,
        source_frames: None,
    };
    fs::write(path, render_ply(&cloud, &mesh.triangles, Some(quality)))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmpfile(name: &str, contents: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("depthforge_ply_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cloud = PointCloud {
            points: vec![
                Point3::new(0.1f64, -2.25, 3.0e-7),
                Point3::new(1.0 / 3.0, 7.0, -0.0),
            ],
            normals: Some(vec![
                Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5)),
                Unit::new_normalize(Vector3::new(0.0, 0.0, 1.0)),
            ]),
            source_frames: Some(vec![4, 199]),
        };
        let dir = std::env::temp_dir().join("depthforge_ply_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.ply");
        write_point_cloud(&path, &cloud).unwrap();
        let back: PointCloud<f64> = read_point_cloud(&path).unwrap();
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.source_frames, cloud.source_frames);
        let a = back.normals.unwrap();
        let b = cloud.normals.unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.as_ref() - y.as_ref()).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_nan_with_line_number() {
        let path = tmpfile(
            "nan.ply",
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nelement face 0\nproperty list uchar uint vertex_indices\nend_header\n0 nan 0\n",
        );
        let e = read_point_cloud::<f64>(&path).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains(":10:"), "unexpected error: {msg}");
        assert!(msg.contains("non-finite"), "unexpected error: {msg}");
    }

    #[test]
    fn rejects_missing_vertices_and_bad_counts() {
        let path = tmpfile(
            "short.ply",
            "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\nelement face 0\nproperty list uchar uint vertex_indices\nend_header\n0 0 0\n",
        );
        assert!(read_point_cloud::<f64>(&path).is_err());

        let path = tmpfile(
            "wide.ply",
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nelement face 0\nproperty list uchar uint vertex_indices\nend_header\n0 0 0 7\n",
        );
        let e = read_point_cloud::<f64>(&path).unwrap_err();
        assert!(e.to_string().contains(":10:"), "got {e}");
    }

    #[test]
    fn rejects_out_of_range_face_index() {
        let path = tmpfile(
            "badface.ply",
            "ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\nproperty double y\nproperty double z\nelement face 1\nproperty list uchar uint vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n",
        );
        let e = read_triangle_mesh::<f64>(&path).unwrap_err();
        assert!(e.to_string().contains("out of range"), "got {e}");
    }

    #[test]
    fn rejects_binary_format() {
        let path = tmpfile(
            "binary.ply",
            "ply\nformat binary_little_endian 1.0\nelement vertex 0\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        );
        assert!(read_point_cloud::<f64>(&path).is_err());
    }
}

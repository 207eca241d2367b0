//! Trajectory CSV: header `frame,tx,ty,tz,qx,qy,qz,qw`, one pose per row,
//! millimetres, Hamilton quaternion with w last, camera-to-world.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pose::{CameraPose, Trajectory};
use crate::Real;

const HEADER: &str = "frame,tx,ty,tz,qx,qy,qz,qw";
const UNIT_REJECT_TOL: f64 = 1e-3;

pub fn read_trajectory<R: Real>(path: impl AsRef<Path>) -> Result<Trajectory<R>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut poses = Vec::new();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    if header.trim() != HEADER {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `{HEADER}`, got `{}`", header.trim()),
        ));
    }

    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected 8 fields, got {}", fields.len()),
            ));
        }
        let frame_id: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, idx + 1, format!("invalid frame id `{}`", fields[0])))?;
        let mut vals = [0.0f64; 7];
        for (slot, f) in vals.iter_mut().zip(&fields[1..]) {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, idx + 1, format!("invalid number `{f}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, idx + 1, format!("non-finite value `{f}`")));
            }
            *slot = v;
        }
        let q = Quaternion::new(
            R::of_f64(vals[6]), // w
            R::of_f64(vals[3]),
            R::of_f64(vals[4]),
            R::of_f64(vals[5]),
        );
        let norm = q.norm().f64();
        if (norm - 1.0).abs() > UNIT_REJECT_TOL {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("quaternion is not unit length (norm {norm})"),
            ));
        }
        if let Some(last) = poses.last() {
            let last: &CameraPose<R> = last;
            if frame_id <= last.frame_id {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!(
                        "frame ids must be strictly increasing ({} after {})",
                        frame_id, last.frame_id
                    ),
                ));
            }
        }
        poses.push(CameraPose::new(
            frame_id,
            UnitQuaternion::new_normalize(q),
            Vector3::new(R::of_f64(vals[0]), R::of_f64(vals[1]), R::of_f64(vals[2])),
        ));
    }
    Ok(Trajectory { poses })
}

pub fn write_trajectory<R: Real>(path: impl AsRef<Path>, traj: &Trajectory<R>) -> Result<()> {
    let path = path.as_ref();
    let mut s = String::from(HEADER);
    s.push('\n');
    for p in &traj.poses {
        let t = &p.translation;
        let q = p.rotation.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            p.frame_id,
            t.x.f64(),
            t.y.f64(),
            t.z.f64(),
            q.i.f64(),
            q.j.f64(),
            q.k.f64(),
            q.w.f64(),
        );
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

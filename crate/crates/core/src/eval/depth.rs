//! Pinhole depth rasterization of a triangle mesh.

use nalgebra::{Point3, Vector2};

use crate::error::Result;
use crate::mesh::TriangleMesh;
use crate::pose::{CameraIntrinsics, CameraPose};
use crate::Real;

/// Row-major depth image in mm; 0 means no surface was hit.
#[derive(Debug, Clone)]
pub struct DepthMap<R: Real> {
    pub width: u32,
    pub height: u32,
    pub depths: Vec<R>,
    pub intrinsics: CameraIntrinsics<R>,
    pub pose: CameraPose<R>,
}

impl<R: Real> DepthMap<R> {
    pub fn at(&self, u: u32, v: u32) -> R {
        self.depths[(v * self.width + u) as usize]
    }

    pub fn covered_pixels(&self) -> usize {
        self.depths.iter().filter(|&&d| d > R::zero()).count()
    }
}

/// Projects every triangle through the pinhole camera and keeps the nearest
/// depth per pixel (z-buffer). Depth is interpolated perspective-correctly
/// (linear in 1/z). Triangles with a vertex at or behind the camera plane
/// are skipped; a mesh entirely behind the camera yields an all-zero map.
pub fn rasterize_depth<R: Real>(
    mesh: &TriangleMesh<R>,
    intr: &CameraIntrinsics<R>,
    pose: &CameraPose<R>,
) -> Result<DepthMap<R>> {
    intr.validate()?;
    let (w, h) = (intr.width as usize, intr.height as usize);
    let mut depths = vec![R::zero(); w * h];

    let cam_vertices: Vec<Point3<R>> = mesh
        .vertices
        .iter()
        .map(|v| pose.world_to_camera(v))
        .collect();

    let near = R::of_f64(1e-6);
    let half = R::of_f64(0.5);
    for tri in &mesh.triangles {
        let a = cam_vertices[tri[0] as usize];
        let b = cam_vertices[tri[1] as usize];
        let c = cam_vertices[tri[2] as usize];
        if a.z <= near || b.z <= near || c.z <= near {
            continue;
        }
        let pa = Vector2::new(intr.fx * a.x / a.z + intr.cx, intr.fy * a.y / a.z + intr.cy);
        let pb = Vector2::new(intr.fx * b.x / b.z + intr.cx, intr.fy * b.y / b.z + intr.cy);
        let pc = Vector2::new(intr.fx * c.x / c.z + intr.cx, intr.fy * c.y / c.z + intr.cy);

        let area = (pb - pa).perp(&(pc - pa));
        if area.abs() < R::of_f64(1e-12) {
            continue;
        }
        let inv_area = R::one() / area;
        let inv_z = (R::one() / a.z, R::one() / b.z, R::one() / c.z);

        let min_x = pa.x.min(pb.x).min(pc.x).f64().floor().max(0.0) as usize;
        let max_x = (pa.x.max(pb.x).max(pc.x).f64().ceil() as usize).min(w.saturating_sub(1));
        let min_y = pa.y.min(pb.y).min(pc.y).f64().floor().max(0.0) as usize;
        let max_y = (pa.y.max(pb.y).max(pc.y).f64().ceil() as usize).min(h.saturating_sub(1));
        if min_x > max_x || min_y > max_y {
            continue;
        }

        for py in min_y..=max_y {
            for px in min_x..=max_x {
                let p = Vector2::new(R::of_usize(px) + half, R::of_usize(py) + half);
                let wa = (pb - p).perp(&(pc - p)) * inv_area;
                let wb = (pc - p).perp(&(pa - p)) * inv_area;
                let wc = (pa - p).perp(&(pb - p)) * inv_area;
                if wa < R::zero() || wb < R::zero() || wc < R::zero() {
                    continue;
                }
                let z = R::one() / (wa * inv_z.0 + wb * inv_z.1 + wc * inv_z.2);
                let slot = &mut depths[py * w + px];
                if *slot == R::zero() || z < *slot {
                    *slot = z;
                }
            }
        }
    }

    Ok(DepthMap {
        width: intr.width,
        height: intr.height,
        depths,
        intrinsics: *intr,
        pose: *pose,
    })
}

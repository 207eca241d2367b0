use depthforge_core::eval::icp::{icp_align, IcpParams};
use depthforge_core::synth::ellipsoid;
use depthforge_core::transform::SimilarityTransform;
use nalgebra::{Point3, UnitQuaternion, Vector3};

fn main() {
    // Tessellated cuboid: corners pin the alignment.
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let (sx, sy, sz) = (30.0f64, 22.0, 15.0);
    let n = 6usize;
    for face in 0..6 {
        let base = vertices.len() as u32;
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (i as f64 / n as f64 * 2.0 - 1.0, j as f64 / n as f64 * 2.0 - 1.0);
                let p = match face {
                    0 => Point3::new(sx, a * sy, b * sz),
                    1 => Point3::new(-sx, a * sy, b * sz),
                    2 => Point3::new(a * sx, sy, b * sz),
                    3 => Point3::new(a * sx, -sy, b * sz),
                    4 => Point3::new(a * sx, b * sy, sz),
                    _ => Point3::new(a * sx, b * sy, -sz),
                };
                vertices.push(p);
            }
        }
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                let v = base + i * (n as u32 + 1) + j;
                triangles.push([v, v + 1, v + n as u32 + 2]);
                triangles.push([v, v + n as u32 + 2, v + n as u32 + 1]);
            }
        }
    }
    let mesh = depthforge_core::mesh::TriangleMesh::new(vertices, triangles);
    let _ = ellipsoid::<f64>;
    let t = SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(0.05f64, -0.03, 0.08),
        Vector3::new(2.0, -1.0, 0.5),
    );
    let moved: Vec<Point3<f64>> = mesh.vertices.iter().map(|p| t.apply_point(p)).collect();
    for iters in [200, 500, 1000, 2000, 4000] {
        let params = IcpParams { max_iterations: iters, tolerance: 1e-12, trim_factor: 3.0 };
        let r = icp_align(&moved, &mesh, &params).unwrap();
        let inv = t.inverse();
        println!(
            "iters {:3}: used {:3} rms {:.3e} rot_err {:.3e} trans_err {:.3e} kept {}",
            iters, r.iterations, r.rms,
            r.transform.rotation.angle_to(&inv.rotation),
            (r.transform.translation - inv.translation).norm(),
            r.correspondences,
        );
    }
}

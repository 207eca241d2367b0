//! Point-to-surface iterative closest point with correspondence trimming.

use nalgebra::{Matrix3, Point3, UnitQuaternion, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::meshquery::MeshQuery;
use crate::transform::SimilarityTransform;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams<R: Real> {
    pub max_iterations: usize,
    /// Stop when the trimmed RMS changes by less than this between iterations (mm).
    pub tolerance: R,
    /// Correspondences farther than `trim_factor` times the median distance
    /// are rejected each iteration.
    pub trim_factor: R,
}

impl<R: Real> Default for IcpParams<R> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: R::of_f64(1e-6),
            trim_factor: R::of_f64(3.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IcpResult<R: Real> {
    /// Rigid transform (scale = 1) mapping source coordinates onto the target.
    pub transform: SimilarityTransform<R>,
    /// RMS of the trimmed correspondence distances at convergence (mm).
    pub rms: R,
    pub iterations: usize,
    /// Correspondences that survived trimming in the final iteration.
    pub correspondences: usize,
}

const MIN_CORRESPONDENCES: usize = 3;

/// Aligns `source` points onto the surface of `target` by iterating
/// closest-point correspondences and the SVD closed-form rigid update.
pub fn icp_align<R: Real>(
    source: &[Point3<R>],
    target: &TriangleMesh<R>,
    params: &IcpParams<R>,
) -> Result<IcpResult<R>> {
    if source.is_empty() {
        return Err(Error::EmptyInput("icp source points"));
    }
    if target.is_empty() {
        return Err(Error::EmptyInput("icp target mesh"));
    }
    let query = MeshQuery::new(target);
    let mut current: Vec<Point3<R>> = source.to_vec();
    let mut transform = SimilarityTransform::identity();
    let mut prev_rms: Option<R> = None;
    let mut rms = R::zero();
    let mut kept = 0usize;
    let mut iterations = 0usize;

    for _ in 0..params.max_iterations {
        iterations += 1;
        let pairs: Vec<(Point3<R>, Point3<R>, R)> = current
            .par_iter()
            .map(|p| {
                let cp = query.closest_point(p).expect("non-empty mesh");
                (*p, cp.point, cp.distance_sq.sqrt())
            })
            .collect();

        let mut dists: Vec<R> = pairs.iter().map(|&(_, _, d)| d).collect();
        dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let median = dists[(dists.len() - 1) / 2];
        let threshold = params.trim_factor * median;
        let trimmed: Vec<&(Point3<R>, Point3<R>, R)> =
            pairs.iter().filter(|&&(_, _, d)| d <= threshold).collect();
        kept = trimmed.len();
        if kept < MIN_CORRESPONDENCES {
            return Err(Error::InsufficientCorrespondences {
                found: kept,
                required: MIN_CORRESPONDENCES,
            });
        }

        let mut sq_sum = R::zero();
        for &&(_, _, d) in &trimmed {
            sq_sum += d * d;
        }
        rms = (sq_sum / R::of_usize(kept)).sqrt();
        if let Some(prev) = prev_rms {
            if (prev - rms).abs() < params.tolerance {
                break;
            }
        }
        prev_rms = Some(rms);

        let delta = kabsch(&trimmed);
        transform = delta.compose(&transform);
        for p in &mut current {
            *p = delta.apply_point(p);
        }
    }

    Ok(IcpResult {
        transform,
        rms,
        iterations,
        correspondences: kept,
    })
}

/// Closed-form least-squares rigid transform mapping the first points of the
/// pairs onto the second.
fn kabsch<R: Real>(pairs: &[&(Point3<R>, Point3<R>, R)]) -> SimilarityTransform<R> {
    let n = R::of_usize(pairs.len());
    let mut mu_src = Vector3::zeros();
    let mut mu_dst = Vector3::zeros();
    for &&(s, d, _) in pairs {
        mu_src += s.coords;
        mu_dst += d.coords;
    }
    mu_src /= n;
    mu_dst /= n;

    let mut h = Matrix3::zeros();
    for &&(s, d, _) in pairs {
        h += (s.coords - mu_src) * (d.coords - mu_dst).transpose();
    }
    // Already aligned (or degenerate): fall back to pure translation.
    if h.norm() < R::of_f64(1e-30) {
        return SimilarityTransform::rigid(UnitQuaternion::identity(), mu_dst - mu_src);
    }

    let svd = h.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < R::zero() {
        let mut v = v_t.transpose();
        v.column_mut(2).neg_mut();
        r = v * u.transpose();
    }
    let rotation = UnitQuaternion::from_matrix(&r);
    let translation = mu_dst - rotation * mu_src;
    SimilarityTransform::rigid(rotation, translation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ellipsoid;

    // Distinct semi-axes: no rotational symmetry to confuse alignment.
    fn blob() -> TriangleMesh<f64> {
        ellipsoid(Point3::origin(), Vector3::new(30.0, 22.0, 15.0), 32, 16)
    }

    #[test]
    fn aligned_source_returns_identity() {
        let mesh = blob();
        let result = icp_align(&mesh.vertices, &mesh, &IcpParams::default()).unwrap();
        assert!(result.rms < 1e-9);
        assert!(result.transform.rotation.angle() < 1e-9);
        assert!(result.transform.translation.norm() < 1e-9);
    }

    #[test]
    fn recovers_known_rigid_transform() {
        let mesh = blob();
        let t = SimilarityTransform::rigid(
            UnitQuaternion::from_euler_angles(0.05f64, -0.03, 0.08),
            Vector3::new(2.0, -1.0, 0.5),
        );
        let moved: Vec<Point3<f64>> = mesh.vertices.iter().map(|p| t.apply_point(p)).collect();
        // Point-to-point ICP on a smooth blob converges linearly; give it room.
        let params = IcpParams {
            max_iterations: 3000,
            tolerance: 1e-9,
            trim_factor: 3.0,
        };
        let result = icp_align(&moved, &mesh, &params).unwrap();
        // The recovered transform must invert t.
        let inv = t.inverse();
        assert!(
            result.transform.rotation.angle_to(&inv.rotation) < 1e-5,
            "rotation angle error {}",
            result.transform.rotation.angle_to(&inv.rotation)
        );
        assert!(
            (result.transform.translation - inv.translation).norm() < 1e-3,
            "translation error {}",
            (result.transform.translation - inv.translation).norm()
        );
    }

    #[test]
    fn empty_inputs_are_errors() {
        let mesh = blob();
        assert!(icp_align::<f64>(&[], &mesh, &IcpParams::default()).is_err());
        assert!(icp_align(&mesh.vertices, &TriangleMesh::default(), &IcpParams::default()).is_err());
    }
}

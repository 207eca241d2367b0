//! Trajectory association, similarity alignment and translational RMSE.
//!
//! Monocular reconstructions are scale-ambiguous, so alignment estimates a
//! full similarity (Umeyama closed form) over the translations of poses
//! associated by exact frame id.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::pose::Trajectory;
use crate::transform::SimilarityTransform;
use crate::Real;

/// Pose index pairs (est, gt) with equal frame ids.
pub fn associate<R: Real>(est: &Trajectory<R>, gt: &Trajectory<R>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < est.poses.len() && j < gt.poses.len() {
        let (fe, fg) = (est.poses[i].frame_id, gt.poses[j].frame_id);
        match fe.cmp(&fg) {
            std::cmp::Ordering::Equal => {
                out.push((i, j));
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct AlignmentStats {
    pub matched: usize,
    pub unmatched_est: usize,
    pub unmatched_gt: usize,
}

/// Closed-form similarity (scale, rotation, translation) minimizing
/// `sum || s R t_est + T - t_gt ||^2` over frame-associated translations.
/// Requires at least 3 matches.
pub fn align_trajectories<R: Real>(
    est: &Trajectory<R>,
    gt: &Trajectory<R>,
) -> Result<(SimilarityTransform<R>, AlignmentStats)> {
    let matches = associate(est, gt);
    if matches.len() < 3 {
        return Err(Error::InsufficientMatches {
            found: matches.len(),
            required: 3,
        });
    }
    let n = R::of_usize(matches.len());
    let mut mu_e = Vector3::zeros();
    let mut mu_g = Vector3::zeros();
    for &(i, j) in &matches {
        mu_e += est.poses[i].translation;
        mu_g += gt.poses[j].translation;
    }
    mu_e /= n;
    mu_g /= n;

    let mut sigma = Matrix3::zeros();
    let mut var_e = R::zero();
    for &(i, j) in &matches {
        let e = est.poses[i].translation - mu_e;
        let g = gt.poses[j].translation - mu_g;
        sigma += g * e.transpose();
        var_e += e.norm_squared();
    }
    sigma /= n;
    var_e /= n;
    if var_e <= R::zero() {
        return Err(Error::InvalidData(
            "estimated trajectory is degenerate (all associated poses coincide)".into(),
        ));
    }

    let svd = sigma.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let mut s = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < R::zero() {
        s[(2, 2)] = -R::one();
    }
    let r = u * s * v_t;
    let scale = (svd.singular_values[0] * s[(0, 0)]
        + svd.singular_values[1] * s[(1, 1)]
        + svd.singular_values[2] * s[(2, 2)])
        / var_e;
    let rotation = UnitQuaternion::from_matrix(&r);
    let translation = mu_g - (rotation * mu_e) * scale;

    Ok((
        SimilarityTransform::new(scale, rotation, translation),
        AlignmentStats {
            matched: matches.len(),
            unmatched_est: est.poses.len() - matches.len(),
            unmatched_gt: gt.poses.len() - matches.len(),
        },
    ))
}

/// RMSE of Euclidean translation error over associated frames after applying
/// `t` to the estimated trajectory.
pub fn trajectory_rmse<R: Real>(
    est: &Trajectory<R>,
    gt: &Trajectory<R>,
    t: &SimilarityTransform<R>,
) -> Result<R> {
    let matches = associate(est, gt);
    if matches.is_empty() {
        return Err(Error::InsufficientMatches {
            found: 0,
            required: 1,
        });
    }
    let mut sq_sum = R::zero();
    for &(i, j) in &matches {
        let mapped = t.apply_point(&est.poses[i].center());
        sq_sum += (mapped - gt.poses[j].center()).norm_squared();
    }
    Ok((sq_sum / R::of_usize(matches.len())).sqrt())
}

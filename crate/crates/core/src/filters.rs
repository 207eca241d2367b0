//! Pre-processing filters: radius outlier removal and voxel-grid resampling.
//!
//! Both are scale-free by default: the radius and voxel size derive from the
//! median nearest-neighbor spacing of the input cloud, so they survive the
//! arbitrary global scale of monocular reconstructions.

use nalgebra::{Point3, Unit, Vector3};
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusFilterParams<R: Real> {
    pub radius: R,
    pub min_neighbors: usize,
}

impl<R: Real> RadiusFilterParams<R> {
    pub fn validate(&self) -> Result<()> {
        if self.radius <= R::zero() {
            return Err(Error::invalid_parameter("radius", "must be positive"));
        }
        if self.min_neighbors < 1 {
            return Err(Error::invalid_parameter("min_neighbors", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelFilterParams<R: Real> {
    pub voxel_size: R,
}

impl<R: Real> VoxelFilterParams<R> {
    pub fn validate(&self) -> Result<()> {
        if self.voxel_size <= R::zero() {
            return Err(Error::invalid_parameter("voxel_size", "must be positive"));
        }
        Ok(())
    }
}

/// Median distance from each point to its nearest other point. Returns
/// `None` for clouds with fewer than two points. The median is the lower
/// median of the sorted distances, which keeps it deterministic.
pub fn median_nn_distance<R: Real>(cloud: &PointCloud<R>, index: &SpatialIndex<R>) -> Option<R> {
    if cloud.len() < 2 {
        return None;
    }
    let mut dists: Vec<R> = cloud
        .points
        .par_iter()
        .map(|p| {
            let nn = index.knn_query(p, 2).expect("k >= 1");
            // The query point itself is always returned first at distance 0.
            let other = cloud.points[*nn.last().expect("two points exist")];
            (other - p).norm()
        })
        .collect();
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    Some(dists[(dists.len() - 1) / 2])
}

/// Removes points with fewer than `min_neighbors` *other* points within
/// `radius`. Order and companion fields of survivors are preserved.
pub fn radius_outlier_removal<R: Real>(
    cloud: &PointCloud<R>,
    params: &RadiusFilterParams<R>,
) -> Result<PointCloud<R>> {
    params.validate()?;
    let index = SpatialIndex::build(cloud);
    let keep_flags: Vec<bool> = cloud
        .points
        .par_iter()
        .map(|p| {
            let hits = index.radius_query(p, params.radius).expect("radius > 0");
            // The point itself is among the hits; neighbors exclude it.
            hits.len() - 1 >= params.min_neighbors
        })
        .collect();
    let keep: Vec<usize> = keep_flags
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect();
    Ok(cloud.retain_indices(&keep))
}

/// Integer voxel coordinate of `p` in a grid of edge `size` anchored at `anchor`.
fn voxel_of<R: Real>(p: &Point3<R>, anchor: &Point3<R>, size: R) -> (i64, i64, i64) {
    let f = |i: usize| ((p[i] - anchor[i]) / size).f64().floor() as i64;
    (f(0), f(1), f(2))
}

/// Re-samples the cloud to one point per occupied voxel: the centroid of the
/// voxel's members. The grid is anchored at the cloud's minimum corner, so
/// the result is translation-invariant up to binning. Output is ordered by
/// lexicographic voxel index. Normals are averaged and re-normalized; the
/// centroid inherits the provenance of its lowest-index member, which also
/// supplies the normal if the average degenerates.
pub fn voxel_downsample<R: Real>(
    cloud: &PointCloud<R>,
    params: &VoxelFilterParams<R>,
) -> Result<PointCloud<R>> {
    params.validate()?;
    if cloud.is_empty() {
        return Ok(cloud.clone());
    }
    let anchor = crate::aabb::Aabb::from_points(cloud.points.iter())
        .expect("non-empty cloud")
        .min;

    let mut bins: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        bins.entry(voxel_of(p, &anchor, params.voxel_size))
            .or_default()
            .push(i);
    }

    let mut points = Vec::with_capacity(bins.len());
    let mut normals = cloud.normals.as_ref().map(|_| Vec::with_capacity(bins.len()));
    let mut frames = cloud
        .source_frames
        .as_ref()
        .map(|_| Vec::with_capacity(bins.len()));

    for members in bins.values() {
        let mut sum = Vector3::zeros();
        for &i in members {
            sum += cloud.points[i].coords;
        }
        points.push(Point3::from(sum / R::of_usize(members.len())));

        if let (Some(out), Some(ns)) = (normals.as_mut(), cloud.normals.as_ref()) {
            let mut nsum = Vector3::zeros();
            for &i in members {
                nsum += ns[i].into_inner();
            }
            let avg = nsum / R::of_usize(members.len());
            let n = Unit::try_new(avg, R::of_f64(1e-6))
                .unwrap_or_else(|| ns[members[0]]);
            out.push(n);
        }
        if let (Some(out), Some(fs)) = (frames.as_mut(), cloud.source_frames.as_ref()) {
            out.push(fs[members[0]]);
        }
    }

    Ok(PointCloud {
        points,
        normals,
        source_frames: frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 3]]) -> PointCloud<f64> {
        PointCloud::from_points(points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect())
    }

    #[test]
    fn isolated_point_is_removed() {
        let c = cloud(&[[0.0, 0.0, 0.0]]);
        let out = radius_outlier_removal(
            &c,
            &RadiusFilterParams {
                radius: 10.0,
                min_neighbors: 1,
            },
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn tight_pair_supports_itself() {
        let c = cloud(&[[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]);
        let out = radius_outlier_removal(
            &c,
            &RadiusFilterParams {
                radius: 1.0,
                min_neighbors: 1,
            },
        )
        .unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn min_neighbors_zero_is_rejected() {
        let c = cloud(&[[0.0, 0.0, 0.0]]);
        assert!(radius_outlier_removal(
            &c,
            &RadiusFilterParams {
                radius: 1.0,
                min_neighbors: 0,
            },
        )
        .is_err());
    }

    #[test]
    fn cluster_survives_outlier_removed() {
        let mut pts: Vec<[f64; 3]> = (0..10)
            .map(|i| [0.1 * i as f64, 0.05 * i as f64, 0.0])
            .collect();
        pts.push([100.0, 0.0, 0.0]);
        let c = cloud(&pts);
        let out = radius_outlier_removal(
            &c,
            &RadiusFilterParams {
                radius: 5.0,
                min_neighbors: 3,
            },
        )
        .unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.points.iter().all(|p| p.x < 50.0));
    }

    #[test]
    fn voxel_merges_to_centroid() {
        let c = cloud(&[[0.0, 0.0, 0.0], [0.4, 0.0, 0.0]]);
        let out = voxel_downsample(&c, &VoxelFilterParams { voxel_size: 1.0 }).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.points[0] - Point3::new(0.2, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn distant_points_pass_through_as_permutation() {
        let c = cloud(&[[5.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 5.0, 0.0]]);
        let out = voxel_downsample(&c, &VoxelFilterParams { voxel_size: 2.0 }).unwrap();
        assert_eq!(out.len(), 3);
        let mut got: Vec<_> = out.points.iter().map(|p| (p.x as i64, p.y as i64)).collect();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 0), (0, 5), (5, 0)]);
    }

    #[test]
    fn voxel_keeps_lowest_index_provenance() {
        let mut c = cloud(&[[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        c.source_frames = Some(vec![7, 3, 9]);
        let out = voxel_downsample(&c, &VoxelFilterParams { voxel_size: 1.0 }).unwrap();
        assert_eq!(out.source_frames, Some(vec![7, 9]));
    }
}

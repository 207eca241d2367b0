//! Surface-to-surface metrics: grid-sampled height RMSD and per-vertex
//! signed-distance reports.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::meshquery::MeshQuery;
use crate::Real;

/// Height samples of both surfaces over a shared xy grid. Arrays are
/// row-major with x fastest: index `(ix, iy)` maps to `iy * m + ix`.
#[derive(Debug, Clone)]
pub struct HeightGrid<R: Real> {
    pub m: usize,
    pub n: usize,
    pub xs: Vec<R>,
    pub ys: Vec<R>,
    /// Ground-truth heights (top surface) where valid.
    pub gt_heights: Vec<R>,
    /// Reconstructed heights where valid.
    pub recon_heights: Vec<R>,
    /// True where both surfaces were hit.
    pub valid: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct RmsdOutcome<R: Real> {
    pub rmsd: R,
    pub grid: HeightGrid<R>,
    pub invalid_samples: usize,
}

/// Root-mean-squared difference of the two surfaces' top heights, sampled on
/// an `m x n` grid over the intersection of their xy footprints. At each
/// sample a vertical ray keeps the hit nearest the viewer (largest z).
/// Samples where either surface is missed are excluded and counted.
pub fn surface_rmsd<R: Real>(
    recon: &TriangleMesh<R>,
    gt: &TriangleMesh<R>,
    m: usize,
    n: usize,
) -> Result<RmsdOutcome<R>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid_parameter("grid", "m and n must be at least 1"));
    }
    if recon.is_empty() || gt.is_empty() {
        return Err(Error::EmptyInput("mesh"));
    }
    let bb_r = crate::aabb::Aabb::from_points(recon.vertices.iter()).expect("non-empty");
    let bb_g = crate::aabb::Aabb::from_points(gt.vertices.iter()).expect("non-empty");
    let x0 = bb_r.min.x.max(bb_g.min.x);
    let x1 = bb_r.max.x.min(bb_g.max.x);
    let y0 = bb_r.min.y.max(bb_g.min.y);
    let y1 = bb_r.max.y.min(bb_g.max.y);
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::NoValidSamples("surface xy footprints do not overlap"));
    }
    let z_top = bb_r.max.z.max(bb_g.max.z) + R::one();

    let xs: Vec<R> = (0..m)
        .map(|i| x0 + (x1 - x0) * (R::of_usize(i) + R::of_f64(0.5)) / R::of_usize(m))
        .collect();
    let ys: Vec<R> = (0..n)
        .map(|j| y0 + (y1 - y0) * (R::of_usize(j) + R::of_f64(0.5)) / R::of_usize(n))
        .collect();

    let q_recon = MeshQuery::new(recon);
    let q_gt = MeshQuery::new(gt);
    let down = Vector3::new(R::zero(), R::zero(), -R::one());
    let top_height = |q: &MeshQuery<R>, x: R, y: R| -> Option<R> {
        let origin = Point3::new(x, y, z_top);
        q.raycast(&origin, &down, R::zero(), R::of_f64(f64::MAX))
            .map(|hit| z_top - hit.t)
    };

    let samples: Vec<(R, R, bool)> = (0..m * n)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % m, idx / m);
            match (
                top_height(&q_gt, xs[ix], ys[iy]),
                top_height(&q_recon, xs[ix], ys[iy]),
            ) {
                (Some(zg), Some(zr)) => (zg, zr, true),
                _ => (R::zero(), R::zero(), false),
            }
        })
        .collect();

    let mut sq_sum = R::zero();
    let mut valid_count = 0usize;
    for &(zg, zr, ok) in &samples {
        if ok {
            let d = zg - zr;
            sq_sum += d * d;
            valid_count += 1;
        }
    }
    if valid_count == 0 {
        return Err(Error::NoValidSamples("no grid sample hit both surfaces"));
    }
    let rmsd = (sq_sum / R::of_usize(valid_count)).sqrt();
    Ok(RmsdOutcome {
        rmsd,
        invalid_samples: m * n - valid_count,
        grid: HeightGrid {
            m,
            n,
            xs,
            ys,
            gt_heights: samples.iter().map(|s| s.0).collect(),
            recon_heights: samples.iter().map(|s| s.1).collect(),
            valid: samples.iter().map(|s| s.2).collect(),
        },
    })
}

/// Signed distances from every `recon` vertex to the closest point on `gt`,
/// with histogram and summary statistics. The sign is the side of the
/// ground-truth surface: positive outside (along the gt triangle normal).
#[derive(Debug, Clone)]
pub struct DistanceReport<R: Real> {
    pub distances: Vec<R>,
    /// `bins + 1` edges spanning [min, max].
    pub bin_edges: Vec<R>,
    pub counts: Vec<usize>,
    pub mean: R,
    pub rms: R,
    pub min: R,
    pub max: R,
    /// (percentile, value) at 5, 25, 50, 75, 95.
    pub percentiles: Vec<(u8, R)>,
}

pub fn distance_report<R: Real>(
    recon: &TriangleMesh<R>,
    gt: &TriangleMesh<R>,
    bins: usize,
) -> Result<DistanceReport<R>> {
    if bins == 0 {
        return Err(Error::invalid_parameter("bins", "must be at least 1"));
    }
    if recon.vertices.is_empty() || gt.is_empty() {
        return Err(Error::EmptyInput("mesh"));
    }
    let query = MeshQuery::new(gt);
    let distances: Vec<R> = recon
        .vertices
        .par_iter()
        .map(|v| {
            let cp = query.closest_point(v).expect("non-empty mesh");
            let d = cp.distance_sq.sqrt();
            let normal = gt
                .triangle_normal(cp.triangle)
                .map(|n| n.into_inner())
                .unwrap_or_else(Vector3::zeros);
            if (v - cp.point).dot(&normal) < R::zero() {
                -d
            } else {
                d
            }
        })
        .collect();

    let mut min = distances[0];
    let mut max = distances[0];
    let mut sum = R::zero();
    let mut sq_sum = R::zero();
    for &d in &distances {
        min = min.min(d);
        max = max.max(d);
        sum += d;
        sq_sum += d * d;
    }
    let n = R::of_usize(distances.len());

    let width = (max - min) / R::of_usize(bins);
    let mut counts = vec![0usize; bins];
    for &d in &distances {
        let idx = if width > R::zero() {
            (((d - min) / width).f64().floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    let bin_edges: Vec<R> = (0..=bins)
        .map(|i| min + width * R::of_usize(i))
        .collect();

    let mut sorted = distances.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let percentile = |p: f64| -> R {
        let rank = (p / 100.0 * (sorted.len() - 1) as f64).round() as usize;
        sorted[rank]
    };

    Ok(DistanceReport {
        mean: sum / n,
        rms: (sq_sum / n).sqrt(),
        min,
        max,
        percentiles: [5u8, 25, 50, 75, 95]
            .iter()
            .map(|&p| (p, percentile(p as f64)))
            .collect(),
        distances,
        bin_edges,
        counts,
    })
}

//! The staged reconstruction pipeline: radius filter, voxel filter, normal
//! estimation, normal orientation, MLS projection, Poisson reconstruction.
//!
//! Unset parameters resolve to scale-free defaults derived from the cloud's
//! median nearest-neighbor spacing, so the same configuration works at any
//! monocular scale. Every stage is timed and its output snapshot kept, so
//! callers can write intermediates and report per-stage counts even when a
//! later stage fails.

use nalgebra::Unit;
use std::time::Instant;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::filters::{
    median_nn_distance, radius_outlier_removal, voxel_downsample, RadiusFilterParams,
    VoxelFilterParams,
};
use crate::kdtree::SpatialIndex;
use crate::mesh::TriangleMesh;
use crate::mls::{estimate_normals, mls_project, orient_normals, KernelSpec, MlsParams};
use crate::poisson::{poisson_reconstruct, PoissonParams, SolveStats};
use crate::pose::Trajectory;
use crate::Real;

/// User-facing parameters; `None` values resolve to scale-free defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams<R: Real> {
    pub radius: Option<R>,
    pub min_neighbors: usize,
    pub voxel_size: Option<R>,
    pub normals_k: usize,
    pub mls_degree: usize,
    pub mls_bandwidth: Option<R>,
    pub mls_k: usize,
    pub poisson: PoissonParams,
}

impl<R: Real> Default for PipelineParams<R> {
    fn default() -> Self {
        Self {
            radius: None,
            min_neighbors: 5,
            voxel_size: None,
            normals_k: 12,
            mls_degree: 2,
            mls_bandwidth: None,
            mls_k: 12,
            poisson: PoissonParams::default(),
        }
    }
}

/// Multiples of the median nearest-neighbor spacing used for the defaults.
const RADIUS_FACTOR: f64 = 3.0;
const VOXEL_FACTOR: f64 = 2.0;
const BANDWIDTH_FACTOR: f64 = 4.0;

/// The concrete values a run actually used, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams<R: Real> {
    pub radius: R,
    pub min_neighbors: usize,
    pub voxel_size: R,
    pub normals_k: usize,
    pub mls_degree: usize,
    pub mls_bandwidth: R,
    pub mls_k: usize,
    pub resolution: usize,
    pub padding: usize,
    /// Median nearest-neighbor distance of the input cloud (mm).
    pub input_median_spacing: R,
}

#[derive(Debug, Clone, Copy)]
pub struct StageRecord {
    pub name: &'static str,
    pub millis: f64,
    pub input_points: usize,
    pub output_points: usize,
}

/// Everything observed while running the pipeline, including snapshots of
/// each intermediate cloud in stage order.
#[derive(Debug, Clone)]
pub struct PipelineTrace<R: Real> {
    pub records: Vec<StageRecord>,
    pub clouds: Vec<(&'static str, PointCloud<R>)>,
    pub resolved: ResolvedParams<R>,
    pub mls_failed: usize,
    pub mls_mean_displacement: f64,
    pub solve: Option<SolveStats>,
    pub isovalue: Option<f64>,
    pub components: Option<usize>,
}

#[derive(Debug)]
pub struct PipelineFailure<R: Real> {
    pub stage: &'static str,
    pub error: Error,
    pub trace: PipelineTrace<R>,
}

pub const STAGE_NAMES: [&str; 6] = [
    "radius_filter",
    "voxel_filter",
    "normal_estimation",
    "normal_orientation",
    "mls_projection",
    "poisson_reconstruction",
];

/// Flips normals away from the cloud centroid: the fallback orientation when
/// no trajectory is available (adequate for star-shaped single-organ scenes).
pub fn orient_outward_from_centroid<R: Real>(cloud: &PointCloud<R>) -> Result<PointCloud<R>> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or(Error::EmptyInput("cloud normals"))?;
    let centroid = cloud.centroid().ok_or(Error::EmptyInput("cloud"))?;
    let oriented = cloud
        .points
        .iter()
        .zip(normals)
        .map(|(p, n)| {
            if n.dot(&(p - centroid)) < R::zero() {
                Unit::new_unchecked(-n.into_inner())
            } else {
                *n
            }
        })
        .collect();
    let mut out = cloud.clone();
    out.normals = Some(oriented);
    Ok(out)
}

/// Computes the concrete parameter set for `cloud`, filling unset values
/// from the median nearest-neighbor spacing.
pub fn resolve_params<R: Real>(
    cloud: &PointCloud<R>,
    params: &PipelineParams<R>,
) -> Result<ResolvedParams<R>> {
    let index = SpatialIndex::build(cloud);
    let median = median_nn_distance(cloud, &index)
        .ok_or(Error::EmptyInput("cloud needs at least 2 points"))?;
    if !(median > R::zero()) {
        return Err(Error::InvalidData(
            "median nearest-neighbor spacing is zero (duplicate-dominated cloud)".into(),
        ));
    }
    Ok(ResolvedParams {
        radius: params.radius.unwrap_or(R::of_f64(RADIUS_FACTOR) * median),
        min_neighbors: params.min_neighbors,
        voxel_size: params.voxel_size.unwrap_or(R::of_f64(VOXEL_FACTOR) * median),
        normals_k: params.normals_k,
        mls_degree: params.mls_degree,
        // Re-derived from the filtered cloud later when left unset.
        mls_bandwidth: params
            .mls_bandwidth
            .unwrap_or(R::of_f64(BANDWIDTH_FACTOR) * median),
        mls_k: params.mls_k,
        resolution: params.poisson.resolution,
        padding: params.poisson.padding,
        input_median_spacing: median,
    })
}

/// Runs the six pipeline stages. On failure, the error names the stage and
/// carries the trace of everything completed before it.
#[allow(clippy::type_complexity)]
pub fn run_pipeline<R: Real>(
    cloud: &PointCloud<R>,
    trajectory: Option<&Trajectory<R>>,
    params: &PipelineParams<R>,
) -> std::result::Result<(TriangleMesh<R>, PipelineTrace<R>), Box<PipelineFailure<R>>> {
    let fail = |stage: &'static str, error: Error, trace: PipelineTrace<R>| {
        Box::new(PipelineFailure {
            stage,
            error,
            trace,
        })
    };

    let mut trace = PipelineTrace {
        records: Vec::new(),
        clouds: Vec::new(),
        resolved: match resolve_params(cloud, params) {
            Ok(r) => r,
            Err(e) => {
                return Err(fail(
                    STAGE_NAMES[0],
                    e,
                    PipelineTrace {
                        records: Vec::new(),
                        clouds: Vec::new(),
                        resolved: ResolvedParams {
                            radius: R::zero(),
                            min_neighbors: params.min_neighbors,
                            voxel_size: R::zero(),
                            normals_k: params.normals_k,
                            mls_degree: params.mls_degree,
                            mls_bandwidth: R::zero(),
                            mls_k: params.mls_k,
                            resolution: params.poisson.resolution,
                            padding: params.poisson.padding,
                            input_median_spacing: R::zero(),
                        },
                        mls_failed: 0,
                        mls_mean_displacement: 0.0,
                        solve: None,
                        isovalue: None,
                        components: None,
                    },
                ))
            }
        },
        mls_failed: 0,
        mls_mean_displacement: 0.0,
        solve: None,
        isovalue: None,
        components: None,
    };

    macro_rules! stage {
        ($name:expr, $input_len:expr, $body:expr) => {{
            let start = Instant::now();
            let out = match $body {
                Ok(v) => v,
                Err(e) => return Err(fail($name, e, trace)),
            };
            let millis = start.elapsed().as_secs_f64() * 1e3;
            trace.records.push(StageRecord {
                name: $name,
                millis,
                input_points: $input_len,
                output_points: 0,
            });
            out
        }};
    }
    macro_rules! finish_stage {
        ($cloud:expr) => {{
            trace.records.last_mut().expect("stage pushed").output_points = $cloud.len();
            trace.clouds.push((
                trace.records.last().expect("stage pushed").name,
                $cloud.clone(),
            ));
        }};
    }

    let filtered = stage!(
        STAGE_NAMES[0],
        cloud.len(),
        radius_outlier_removal(
            cloud,
            &RadiusFilterParams {
                radius: trace.resolved.radius,
                min_neighbors: trace.resolved.min_neighbors,
            },
        )
    );
    finish_stage!(filtered);

    let downsampled = stage!(
        STAGE_NAMES[1],
        filtered.len(),
        voxel_downsample(
            &filtered,
            &VoxelFilterParams {
                voxel_size: trace.resolved.voxel_size,
            },
        )
    );
    finish_stage!(downsampled);

    // The voxel stage changes the spacing; re-derive the MLS bandwidth from
    // the cloud MLS actually sees when it was left unset.
    if params.mls_bandwidth.is_none() {
        let index = SpatialIndex::build(&downsampled);
        if let Some(median) = median_nn_distance(&downsampled, &index) {
            if median > R::zero() {
                trace.resolved.mls_bandwidth = R::of_f64(BANDWIDTH_FACTOR) * median;
            }
        }
    }

    let estimated = stage!(
        STAGE_NAMES[2],
        downsampled.len(),
        estimate_normals(&downsampled, trace.resolved.normals_k).map(|e| e.cloud)
    );
    finish_stage!(estimated);

    let oriented = stage!(STAGE_NAMES[3], estimated.len(), {
        match trajectory {
            Some(traj) => orient_normals(&estimated, traj),
            None => orient_outward_from_centroid(&estimated),
        }
    });
    finish_stage!(oriented);

    let projected = stage!(
        STAGE_NAMES[4],
        oriented.len(),
        mls_project(
            &oriented,
            &MlsParams {
                kernel: KernelSpec {
                    bandwidth: trace.resolved.mls_bandwidth,
                },
                poly_degree: trace.resolved.mls_degree,
                neighbor_count: trace.resolved.mls_k,
            },
        )
    );
    trace.mls_failed = projected.failed;
    trace.mls_mean_displacement = projected.mean_displacement.f64();
    let projected = projected.cloud;
    finish_stage!(projected);

    let outcome = stage!(
        STAGE_NAMES[5],
        projected.len(),
        poisson_reconstruct(&projected, &params.poisson)
    );
    trace.records.last_mut().expect("stage pushed").output_points = outcome.mesh.vertices.len();
    trace.solve = Some(outcome.solve);
    trace.isovalue = Some(outcome.isovalue.f64());
    trace.components = Some(outcome.components);

    Ok((outcome.mesh, trace))
}

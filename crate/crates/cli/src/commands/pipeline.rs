//! `depthforge pipeline`: the full reconstruction pipeline driven by a
//! config file, with optional evaluation against ground truth.
//!
//! The report is written even when a stage fails, naming the failed stage,
//! and intermediates completed before the failure stay on disk.

use clap::Args;
use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::report::{num, RunReport, StageEntry};
use crate::{CliError, CliResult};
use depthforge_core::eval::{align_trajectories, trajectory_rmse};
use depthforge_core::pipeline::{run_pipeline, PipelineTrace};
use depthforge_core::{io, PointCloud64, Trajectory64, TriangleMesh64};

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Flat `key = value` config file; see the README for the key list.
    #[arg(long)]
    pub config: PathBuf,
    /// Write every intermediate cloud and the final mesh into the
    /// intermediates directory.
    #[arg(long)]
    pub keep_intermediates: bool,
}

fn record_trace(report: &mut RunReport, trace: &PipelineTrace<f64>) {
    for r in &trace.records {
        report.stages.push(StageEntry {
            name: r.name.to_string(),
            millis: r.millis,
            input_points: r.input_points,
            output_points: r.output_points,
        });
    }
    let resolved = &trace.resolved;
    report.set_param("radius_mm", num(resolved.radius));
    report.set_param("min_neighbors", resolved.min_neighbors);
    report.set_param("voxel_size_mm", num(resolved.voxel_size));
    report.set_param("normals_k", resolved.normals_k);
    report.set_param("mls_degree", resolved.mls_degree);
    report.set_param("mls_bandwidth_mm", num(resolved.mls_bandwidth));
    report.set_param("mls_k", resolved.mls_k);
    report.set_param("resolution", resolved.resolution);
    report.set_param("padding", resolved.padding);
    report.set_param("median_spacing_mm", num(resolved.input_median_spacing));
    report.set_metric("mls_failed_points", trace.mls_failed);
    report.set_metric("mls_mean_displacement_mm", num(trace.mls_mean_displacement));
    if let Some(solve) = trace.solve {
        report.set_metric("cg_iterations", solve.iterations);
        report.set_metric("cg_relative_residual", num(solve.relative_residual));
    }
    if let Some(iso) = trace.isovalue {
        report.set_metric("isovalue", num(iso));
    }
    if let Some(components) = trace.components {
        report.set_metric("component_count", components);
    }
}

fn write_intermediates(
    dir: &Path,
    trace: &PipelineTrace<f64>,
    mesh: Option<&TriangleMesh64>,
    report: &mut RunReport,
) -> CliResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    for (i, (name, cloud)) in trace.clouds.iter().enumerate() {
        let path = dir.join(format!("{}_{}.ply", i + 1, name));
        io::write_point_cloud(&path, cloud)?;
        report.set_output(&format!("intermediate_{}", name), &path);
    }
    if let Some(mesh) = mesh {
        let path = dir.join(format!("{}_poisson_reconstruction.ply", trace.clouds.len() + 1));
        io::write_triangle_mesh(&path, mesh)?;
        report.set_output("intermediate_poisson_reconstruction", &path);
    }
    Ok(())
}

pub fn run(args: &PipelineArgs) -> CliResult {
    let cfg = PipelineConfig::from_file(&args.config)?;
    let report_path = cfg.report.clone().unwrap_or_else(|| {
        let stem = cfg
            .output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pipeline".into());
        cfg.output.with_file_name(format!("{stem}_report.json"))
    });
    let mut report = RunReport::new("pipeline");
    report.seed = cfg.seed;
    report.set_param("config", args.config.display().to_string());

    let cloud: PointCloud64 = io::read_point_cloud(&cfg.input)?;
    cloud.validate()?;
    let trajectory: Option<Trajectory64> = cfg
        .trajectory
        .as_ref()
        .map(io::read_trajectory)
        .transpose()?;

    let params = cfg.to_pipeline_params();
    let intermediates_dir = cfg.intermediates_dir.clone().unwrap_or_else(|| {
        cfg.output
            .parent()
            .unwrap_or(Path::new("."))
            .join("intermediates")
    });

    let (mesh, trace) = match run_pipeline(&cloud, trajectory.as_ref(), &params) {
        Ok(ok) => ok,
        Err(failure) => {
            record_trace(&mut report, &failure.trace);
            report.failed_stage = Some(failure.stage.to_string());
            report.error = Some(failure.error.to_string());
            if args.keep_intermediates {
                write_intermediates(&intermediates_dir, &failure.trace, None, &mut report)?;
            }
            report.write(&report_path)?;
            return Err(CliError::from(failure.error.in_stage(failure.stage)));
        }
    };
    record_trace(&mut report, &trace);

    io::write_triangle_mesh(&cfg.output, &mesh)?;
    report.set_output("mesh", &cfg.output);
    if args.keep_intermediates {
        write_intermediates(&intermediates_dir, &trace, Some(&mesh), &mut report)?;
    }

    // Optional evaluation against ground truth.
    if let Some(gt_mesh_path) = &cfg.gt_mesh {
        let gt_mesh: TriangleMesh64 = io::read_triangle_mesh(gt_mesh_path)?;
        // Monocular reconstructions live at an arbitrary scale: when both
        // trajectories are present, their similarity alignment carries the
        // mesh into ground-truth coordinates before the rigid ICP refine.
        let mut recon = mesh.clone();
        if let (Some(est), Some(gt_traj_path)) = (&trajectory, &cfg.gt_traj) {
            let gt_traj: Trajectory64 = io::read_trajectory(gt_traj_path)?;
            let (align, stats) = align_trajectories(est, &gt_traj)?;
            let rmse = trajectory_rmse(est, &gt_traj, &align)?;
            report.set_metric("traj_rmse_mm", num(rmse));
            report.set_metric("traj_scale", num(align.scale));
            report.set_metric("traj_matched_poses", stats.matched);
            recon = align.apply_mesh(&recon);
        }
        let (_aligned, _distances) = super::eval_surf::evaluate_surfaces(
            &recon,
            &gt_mesh,
            cfg.rmsd_grid,
            cfg.distance_bins,
            true,
            200,
            &mut report.metrics,
        )?;
    }

    report.write(&report_path)?;
    println!(
        "pipeline: {} -> {} ({} vertices); report {}",
        cfg.input.display(),
        cfg.output.display(),
        mesh.vertices.len(),
        report_path.display()
    );
    Ok(())
}

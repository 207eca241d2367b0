//! `depthforge depth`: render a 16-bit PGM depth map (plus raw f32 sidecar)
//! of a mesh from a trajectory pose.

use clap::Args;
use serde::Deserialize;
use std::path::PathBuf;

use crate::report::{num, RunReport};
use crate::{CliError, CliResult};
use depthforge_core::eval::rasterize_depth;
use depthforge_core::io;
use depthforge_core::pose::CameraIntrinsics;
use depthforge_core::{Trajectory64, TriangleMesh64};

#[derive(Debug, Args)]
pub struct DepthArgs {
    /// JSON file with fx, fy, cx, cy, width, height.
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Trajectory CSV supplying the camera pose.
    #[arg(long)]
    pub traj: PathBuf,
    /// Frame id of the pose to render from.
    #[arg(long)]
    pub pose: u32,
    /// Output basename; writes <out>.pgm and <out>.f32.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    pub mesh: PathBuf,
}

#[derive(Debug, Deserialize)]
struct IntrinsicsFile {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

pub fn run(args: &DepthArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.intrinsics)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", args.intrinsics.display())))?;
    let parsed: IntrinsicsFile = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("{}: invalid intrinsics: {e}", args.intrinsics.display()))
    })?;
    let intr = CameraIntrinsics {
        fx: parsed.fx,
        fy: parsed.fy,
        cx: parsed.cx,
        cy: parsed.cy,
        width: parsed.width,
        height: parsed.height,
    };
    intr.validate()?;

    let mesh: TriangleMesh64 = io::read_triangle_mesh(&args.mesh)?;
    let traj: Trajectory64 = io::read_trajectory(&args.traj)?;
    let pose = traj.pose_by_frame(args.pose).ok_or_else(|| {
        CliError::config(format!(
            "frame {} not present in {}",
            args.pose,
            args.traj.display()
        ))
    })?;

    let map = rasterize_depth(&mesh, &intr, pose)?;
    let pgm_path = args.out.with_extension("pgm");
    let raw_path = args.out.with_extension("f32");
    io::write_depth_pgm16(&pgm_path, map.width, map.height, &map.depths)?;
    io::write_depth_f32(&raw_path, &map.depths)?;

    let covered = map.covered_pixels();
    let mut report = RunReport::new("depth");
    report.set_param("frame", args.pose);
    report.set_metric("covered_pixels", covered);
    report.set_metric(
        "coverage_fraction",
        num(covered as f64 / (map.width as f64 * map.height as f64)),
    );
    if covered > 0 {
        let min = map
            .depths
            .iter()
            .filter(|&&d| d > 0.0)
            .cloned()
            .fold(f64::MAX, f64::min);
        let max = map.depths.iter().cloned().fold(0.0, f64::max);
        report.set_metric("min_depth_mm", num(min));
        report.set_metric("max_depth_mm", num(max));
    }
    report.set_output("pgm", &pgm_path);
    report.set_output("raw_f32", &raw_path);
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    println!(
        "depth: frame {} -> {} ({covered} covered pixels)",
        args.pose,
        pgm_path.display()
    );
    Ok(())
}

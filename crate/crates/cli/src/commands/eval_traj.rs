//! `depthforge eval-traj`: similarity alignment and translational RMSE.

use clap::Args;
use std::path::PathBuf;

use crate::report::{num, RunReport};
use crate::CliResult;
use depthforge_core::eval::{align_trajectories, trajectory_rmse};
use depthforge_core::io;
use depthforge_core::Trajectory64;

#[derive(Debug, Args)]
pub struct EvalTrajArgs {
    #[arg(long)]
    pub report: Option<PathBuf>,
    pub est: PathBuf,
    pub gt: PathBuf,
}

pub fn run(args: &EvalTrajArgs) -> CliResult {
    let est: Trajectory64 = io::read_trajectory(&args.est)?;
    let gt: Trajectory64 = io::read_trajectory(&args.gt)?;

    let (align, stats) = align_trajectories(&est, &gt)?;
    let rmse = trajectory_rmse(&est, &gt, &align)?;

    let mut report = RunReport::new("eval-traj");
    report.set_metric("rmse_mm", num(rmse));
    report.set_metric("scale", num(align.scale));
    report.set_metric("rotation_angle_rad", num(align.rotation.angle()));
    report.set_metric("matched_poses", stats.matched);
    report.set_metric("unmatched_est", stats.unmatched_est);
    report.set_metric("unmatched_gt", stats.unmatched_gt);
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    println!(
        "eval-traj: RMSE {rmse:.4} mm over {} matched poses (scale {:.6})",
        stats.matched, align.scale
    );
    Ok(())
}

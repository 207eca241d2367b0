//! `depthforge poisson`: indicator-function reconstruction of an oriented cloud.

use clap::Args;
use std::path::PathBuf;
use std::time::Instant;

use crate::config::MAX_RESOLUTION;
use crate::report::{num, RunReport, StageEntry};
use crate::{CliError, CliResult};
use depthforge_core::poisson::{poisson_reconstruct, PoissonParams};
use depthforge_core::{io, PointCloud64};

#[derive(Debug, Args)]
pub struct PoissonArgs {
    /// Grid nodes along the longest axis (8..=192).
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Padding cells around the cloud's bounding box (>= 4).
    #[arg(long, default_value_t = 4)]
    pub padding: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
    pub input: PathBuf,
    pub output: PathBuf,
}

pub fn run(args: &PoissonArgs) -> CliResult {
    if args.resolution > MAX_RESOLUTION {
        return Err(CliError::config(format!(
            "--resolution {} exceeds the maximum {MAX_RESOLUTION}",
            args.resolution
        )));
    }
    let cloud: PointCloud64 = io::read_point_cloud(&args.input)?;
    cloud.validate()?;
    if !cloud.has_normals() {
        return Err(CliError::stage(format!(
            "{}: cloud has no normals; run the pipeline or provide nx/ny/nz",
            args.input.display()
        )));
    }

    let params = PoissonParams {
        resolution: args.resolution,
        padding: args.padding,
    };
    let start = Instant::now();
    let outcome = poisson_reconstruct(&cloud, &params)?;
    let millis = start.elapsed().as_secs_f64() * 1e3;
    io::write_triangle_mesh(&args.output, &outcome.mesh)?;

    let mut report = RunReport::new("poisson");
    report.set_param("resolution", args.resolution);
    report.set_param("padding", args.padding);
    report.stages.push(StageEntry {
        name: "poisson_reconstruction".into(),
        millis,
        input_points: cloud.len(),
        output_points: outcome.mesh.vertices.len(),
    });
    report.set_metric("isovalue", num(outcome.isovalue));
    report.set_metric("cg_iterations", outcome.solve.iterations);
    report.set_metric("cg_relative_residual", num(outcome.solve.relative_residual));
    report.set_metric("component_count", outcome.components);
    report.set_metric("vertices", outcome.mesh.vertices.len());
    report.set_metric("triangles", outcome.mesh.triangles.len());
    report.set_output("mesh", &args.output);
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    println!(
        "poisson: {} points -> {} vertices / {} triangles (residual {:.2e}, {} CG iterations)",
        cloud.len(),
        outcome.mesh.vertices.len(),
        outcome.mesh.triangles.len(),
        outcome.solve.relative_residual,
        outcome.solve.iterations
    );
    Ok(())
}

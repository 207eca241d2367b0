//! Synthetic-scene contracts: coverage, ground-truth consistency, corruption
//! statistics and end-to-end determinism (including written files).

use depthforge_core::io;
use depthforge_core::meshquery::MeshQuery;
use depthforge_core::synth::{
    corrupt, make_primitive, orbit_trajectory, sample_visible_points, CorruptionSpec, SceneSpec,
};
use std::fs;

#[test]
fn orbit_samples_cover_the_reachable_sphere_band() {
    let spec = SceneSpec::<f64>::sphere_preset();
    let mesh = make_primitive(&spec).unwrap();
    let traj = orbit_trajectory(&spec).unwrap();
    let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 40, spec.seed).unwrap();

    // Bin directions into azimuth x z-band cells over the band the orbit can
    // actually see and require 95% occupancy.
    const AZ_BINS: usize = 24;
    const Z_BINS: usize = 12;
    let mut occupied = vec![false; AZ_BINS * Z_BINS];
    for p in &cloud.points {
        let d = p.coords.normalize();
        let z = d.z.clamp(-0.9, 0.9);
        if d.z.abs() > 0.9 {
            continue;
        }
        let az = ((d.y.atan2(d.x) + std::f64::consts::PI) / std::f64::consts::TAU * AZ_BINS as f64)
            .min(AZ_BINS as f64 - 1.0) as usize;
        let zi = ((z + 0.9) / 1.8 * Z_BINS as f64).min(Z_BINS as f64 - 1.0) as usize;
        occupied[zi * AZ_BINS + az] = true;
    }
    let frac = occupied.iter().filter(|&&o| o).count() as f64 / occupied.len() as f64;
    assert!(frac >= 0.95, "coverage {frac}");
}

#[test]
fn clean_samples_lie_on_the_mesh() {
    let spec = SceneSpec::<f64>::liver_preset();
    let mesh = make_primitive(&spec).unwrap();
    let mut small = spec.clone();
    small.orbit.n_frames = 60;
    let traj = orbit_trajectory(&small).unwrap();
    let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 20, 1).unwrap();
    let query = MeshQuery::new(&mesh);
    for p in &cloud.points {
        let cp = query.closest_point(p).unwrap();
        assert!(
            cp.distance_sq.sqrt() <= 1e-6,
            "sample off mesh by {}",
            cp.distance_sq.sqrt()
        );
    }
}

#[test]
fn ray_noise_statistics_match_sigma() {
    let spec = SceneSpec::<f64>::sphere_preset();
    let mesh = make_primitive(&spec).unwrap();
    let traj = orbit_trajectory(&spec).unwrap();
    let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 120, 2).unwrap();
    assert!(cloud.len() >= 10_000, "need 10k points, got {}", cloud.len());

    let cspec = CorruptionSpec {
        sigma_ray: 2.0,
        sigma_lat: 0.5,
        outlier_fraction: 0.0,
        global_scale: 1.0,
        seed: 123,
    };
    let out = corrupt(&cloud, &traj, &cspec).unwrap();
    assert_eq!(out.cloud.len(), cloud.len());
    assert_eq!(out.cloud.source_frames, cloud.source_frames);

    // Project displacements onto each point's viewing ray.
    let frames = cloud.source_frames.as_ref().unwrap();
    let mut along = Vec::with_capacity(cloud.len());
    for i in 0..cloud.len() {
        let pose = traj.pose_by_frame(frames[i]).unwrap();
        let ray = (cloud.points[i] - pose.center()).normalize();
        along.push((out.cloud.points[i] - cloud.points[i]).dot(&ray));
    }
    let mean = along.iter().sum::<f64>() / along.len() as f64;
    let var = along.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / along.len() as f64;
    let std = var.sqrt();
    assert!(
        (1.9..=2.1).contains(&std),
        "along-ray std {std} outside [1.9, 2.1]"
    );
}

#[test]
fn corruption_preserves_count_and_provenance_with_outliers() {
    let spec = SceneSpec::<f64>::sphere_preset();
    let mesh = make_primitive(&spec).unwrap();
    let traj = orbit_trajectory(&spec).unwrap();
    let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 10, 4).unwrap();
    let cspec = CorruptionSpec {
        sigma_ray: 1.0,
        sigma_lat: 0.5,
        outlier_fraction: 0.3,
        global_scale: 0.37,
        seed: 9,
    };
    let out = corrupt(&cloud, &traj, &cspec).unwrap();
    assert_eq!(out.cloud.len(), cloud.len());
    assert_eq!(out.cloud.source_frames, cloud.source_frames);
    assert_eq!(out.cloud.normals.as_ref().unwrap().len(), cloud.len());
    let outliers = out.outlier_mask.iter().filter(|&&o| o).count();
    let frac = outliers as f64 / cloud.len() as f64;
    assert!((0.2..0.4).contains(&frac), "outlier fraction {frac}");
}

#[test]
fn written_scene_files_are_bitwise_deterministic() {
    let dir = std::env::temp_dir().join("depthforge_synth_determinism");
    fs::create_dir_all(&dir).unwrap();

    let run = |tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let mut spec = SceneSpec::<f64>::sphere_preset();
        spec.orbit.n_frames = 50;
        let mesh = make_primitive(&spec).unwrap();
        let traj = orbit_trajectory(&spec).unwrap();
        let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 25, spec.seed).unwrap();
        let corrupted = corrupt(
            &cloud,
            &traj,
            &CorruptionSpec {
                sigma_ray: 2.0,
                sigma_lat: 0.5,
                outlier_fraction: 0.05,
                global_scale: 0.37,
                seed: spec.seed,
            },
        )
        .unwrap();
        let mesh_path = dir.join(format!("mesh_{tag}.ply"));
        let traj_path = dir.join(format!("traj_{tag}.csv"));
        let cloud_path = dir.join(format!("cloud_{tag}.ply"));
        io::write_triangle_mesh(&mesh_path, &mesh).unwrap();
        io::write_trajectory(&traj_path, &traj).unwrap();
        io::write_point_cloud(&cloud_path, &corrupted.cloud).unwrap();
        (
            fs::read(mesh_path).unwrap(),
            fs::read(traj_path).unwrap(),
            fs::read(cloud_path).unwrap(),
        )
    };

    let a = run("a");
    let b = run("b");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
}

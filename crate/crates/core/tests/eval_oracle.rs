//! Evaluation oracles: ICP recovery/invariance, RMSD, distance reports,
//! trajectory alignment statistics, depth-map analytic checks.

use depthforge_core::cloud::PointCloud;
use depthforge_core::eval::{
    align_trajectories, distance_report, icp_align, rasterize_depth, surface_rmsd, trajectory_rmse,
    IcpParams,
};
use depthforge_core::mls::{mls_project, KernelSpec, MlsParams};
use depthforge_core::pose::{CameraPose, Trajectory};
use depthforge_core::poisson::{poisson_reconstruct, PoissonParams};
use depthforge_core::synth::{cuboid, look_at_pose, uv_sphere};
use depthforge_core::transform::SimilarityTransform;
use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_rigid(rng: &mut ChaCha8Rng, max_angle: f64, max_shift: f64) -> SimilarityTransform<f64> {
    SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(
            (rng.gen::<f64>() - 0.5) * max_angle,
            (rng.gen::<f64>() - 0.5) * max_angle,
            (rng.gen::<f64>() - 0.5) * max_angle,
        ),
        Vector3::new(
            (rng.gen::<f64>() - 0.5) * max_shift,
            (rng.gen::<f64>() - 0.5) * max_shift,
            (rng.gen::<f64>() - 0.5) * max_shift,
        ),
    )
}

#[test]
fn icp_recovers_transform_at_stated_tolerances() {
    // Angular target: correspondences at corners pin the transform, so the
    // spec tolerances hold with the 1e-6 stopping rule.
    let mesh = cuboid(Point3::origin(), Vector3::new(30.0, 22.0, 15.0), 6);
    let t = SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(0.05, -0.03, 0.08),
        Vector3::new(2.0, -1.0, 0.5),
    );
    let moved: Vec<Point3<f64>> = mesh.vertices.iter().map(|p| t.apply_point(p)).collect();
    let params = IcpParams {
        max_iterations: 2000,
        tolerance: 1e-6,
        trim_factor: 3.0,
    };
    let result = icp_align(&moved, &mesh, &params).unwrap();
    let inv = t.inverse();
    let rot_err = result.transform.rotation.angle_to(&inv.rotation);
    let trans_err = (result.transform.translation - inv.translation).norm();
    assert!(rot_err < 1e-5, "rotation error {rot_err}");
    assert!(trans_err < 1e-3, "translation error {trans_err}");
}

#[test]
fn icp_ignores_far_outliers() {
    let mesh = cuboid(Point3::origin(), Vector3::new(30.0, 22.0, 15.0), 6);
    let t = SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(0.04, 0.02, -0.05),
        Vector3::new(1.5, 0.8, -0.6),
    );
    let mut source: Vec<Point3<f64>> = mesh.vertices.iter().map(|p| t.apply_point(p)).collect();
    // 20% outliers far beyond any plausible trim threshold.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n_outliers = source.len() / 5;
    for _ in 0..n_outliers {
        source.push(Point3::new(
            500.0 + rng.gen::<f64>() * 500.0,
            500.0 + rng.gen::<f64>() * 500.0,
            500.0 + rng.gen::<f64>() * 500.0,
        ));
    }
    let params = IcpParams {
        max_iterations: 2000,
        tolerance: 1e-8,
        trim_factor: 3.0,
    };
    let result = icp_align(&source, &mesh, &params).unwrap();
    let inv = t.inverse();
    assert!(
        result.transform.rotation.angle_to(&inv.rotation) < 1e-4,
        "rotation error {}",
        result.transform.rotation.angle_to(&inv.rotation)
    );
    assert!(
        (result.transform.translation - inv.translation).norm() < 1e-2,
        "translation error {}",
        (result.transform.translation - inv.translation).norm()
    );
}

#[test]
fn icp_is_equivariant_under_common_rigid_motion() {
    let mesh = cuboid(Point3::origin(), Vector3::new(30.0, 22.0, 15.0), 5);
    let offset = SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(0.03, -0.02, 0.04),
        Vector3::new(1.0, -0.5, 0.8),
    );
    let source: Vec<Point3<f64>> = mesh.vertices.iter().map(|p| offset.apply_point(p)).collect();
    let params = IcpParams {
        max_iterations: 1500,
        tolerance: 1e-9,
        trim_factor: 3.0,
    };
    let base = icp_align(&source, &mesh, &params).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let common = random_rigid(&mut rng, 0.6, 40.0);
    let moved_source: Vec<Point3<f64>> =
        source.iter().map(|p| common.apply_point(p)).collect();
    let moved_mesh = common.apply_mesh(&mesh);
    let moved = icp_align(&moved_source, &moved_mesh, &params).unwrap();

    // Expected: common . base . common^-1.
    let expected = common.compose(&base.transform).compose(&common.inverse());
    assert!(
        moved.transform.rotation.angle_to(&expected.rotation) < 1e-6,
        "rotation deviation {}",
        moved.transform.rotation.angle_to(&expected.rotation)
    );
    assert!(
        (moved.transform.translation - expected.translation).norm() < 1e-3,
        "translation deviation {}",
        (moved.transform.translation - expected.translation).norm()
    );
}

#[test]
fn sphere_rmsd_between_tessellations_is_small() {
    let fine = uv_sphere(Point3::origin(), 50.0f64, 96, 48);
    let coarse = uv_sphere(Point3::origin(), 50.0, 48, 24);
    let out = surface_rmsd(&coarse, &fine, 80, 80).unwrap();
    // Tessellation sagitta at 48x24 is ~0.2 mm on a 50 mm sphere.
    assert!(out.rmsd < 0.5, "rmsd {}", out.rmsd);
    let identical = surface_rmsd(&fine, &fine, 80, 80).unwrap();
    assert_eq!(identical.rmsd, 0.0);
}

fn noisy_sphere_cloud(n: usize, radius: f64, sigma: f64, seed: u64) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut normals = Vec::new();
    while points.len() < n {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if v.norm() < 1e-6 {
            continue;
        }
        let dir = v.normalize();
        let noise = Vector3::new(
            sigma * rng.sample::<f64, _>(StandardNormal),
            sigma * rng.sample::<f64, _>(StandardNormal),
            sigma * rng.sample::<f64, _>(StandardNormal),
        );
        points.push(Point3::from(dir * radius + noise));
        normals.push(Unit::new_unchecked(dir));
    }
    PointCloud {
        points,
        normals: Some(normals),
        source_frames: None,
    }
}

#[test]
fn noisy_sphere_distance_histogram_is_unimodal_near_zero() {
    let noisy = noisy_sphere_cloud(4000, 50.0, 1.0, 41);
    let smoothed = mls_project(
        &noisy,
        &MlsParams {
            kernel: KernelSpec { bandwidth: 6.0 },
            poly_degree: 2,
            neighbor_count: 20,
        },
    )
    .unwrap();
    let recon = poisson_reconstruct(&smoothed.cloud, &PoissonParams::default())
        .unwrap()
        .mesh;
    let gt = uv_sphere(Point3::origin(), 50.0, 96, 48);
    let report = distance_report(&recon, &gt, 32).unwrap();

    let cell = 108.0 / 55.0; // ~64^3 grid over the padded 100 mm sphere box
    let mode = report
        .counts
        .iter()
        .enumerate()
        .max_by_key(|&(_, c)| *c)
        .map(|(i, _)| i)
        .unwrap();
    let mode_center =
        (report.bin_edges[mode] + report.bin_edges[mode + 1]) / 2.0;
    assert!(
        mode_center.abs() < cell,
        "mode center {mode_center}, cell {cell}"
    );
    // Unimodal: exactly one local maximum of the smoothed histogram above a
    // 20% prominence floor.
    let smoothed: Vec<f64> = (0..report.counts.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(report.counts.len() - 1);
            (lo..=hi).map(|j| report.counts[j] as f64).sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let top = smoothed.iter().cloned().fold(0.0, f64::max);
    let peaks = (1..smoothed.len() - 1)
        .filter(|&i| {
            smoothed[i] > smoothed[i - 1]
                && smoothed[i] > smoothed[i + 1]
                && smoothed[i] > 0.2 * top
        })
        .count();
    assert!(peaks <= 1, "{peaks} prominent peaks, histogram not unimodal");
}

fn orbit(n: usize) -> Trajectory<f64> {
    let poses = (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::TAU;
            let center = Point3::new(150.0 * a.cos(), 150.0 * a.sin(), 40.0 * (2.0 * a).sin());
            look_at_pose(i as u32, center, Point3::origin()).unwrap()
        })
        .collect();
    Trajectory { poses }
}

/// Per-pose noise whose 3D displacement RMS is `sigma`.
fn jitter(traj: &Trajectory<f64>, sigma: f64, seed: u64) -> Trajectory<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_axis = sigma / 3.0f64.sqrt();
    Trajectory {
        poses: traj
            .poses
            .iter()
            .map(|p| {
                let mut out = *p;
                out.translation += Vector3::new(
                    per_axis * rng.sample::<f64, _>(StandardNormal),
                    per_axis * rng.sample::<f64, _>(StandardNormal),
                    per_axis * rng.sample::<f64, _>(StandardNormal),
                );
                out
            })
            .collect(),
    }
}

#[test]
fn noisy_alignment_rmse_sits_in_band() {
    let gt = orbit(900);
    for seed in 0..20u64 {
        let est = jitter(&gt, 1.0, 100 + seed);
        let (align, _) = align_trajectories(&est, &gt).unwrap();
        let rmse = trajectory_rmse(&est, &gt, &align).unwrap();
        assert!(
            (0.7..=1.3).contains(&rmse),
            "seed {seed}: rmse {rmse} outside [0.7, 1.3]"
        );
    }
}

#[test]
fn alignment_beats_random_perturbations() {
    let gt = orbit(120);
    let t = SimilarityTransform::new(
        0.42,
        UnitQuaternion::from_euler_angles(0.4, -0.8, 0.3),
        Vector3::new(20.0, -7.0, 4.0),
    );
    let est = jitter(&t.apply_trajectory(&gt), 0.5, 7);
    let (align, _) = align_trajectories(&est, &gt).unwrap();

    let objective = |candidate: &SimilarityTransform<f64>| -> f64 {
        est.poses
            .iter()
            .zip(&gt.poses)
            .map(|(e, g)| {
                (candidate.apply_point(&e.center()) - g.center()).norm_squared()
            })
            .sum()
    };
    let best = objective(&align);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let perturbed = SimilarityTransform::new(
            align.scale * (1.0 + (rng.gen::<f64>() - 0.5) * 0.1),
            UnitQuaternion::from_euler_angles(
                (rng.gen::<f64>() - 0.5) * 0.17,
                (rng.gen::<f64>() - 0.5) * 0.17,
                (rng.gen::<f64>() - 0.5) * 0.17,
            ) * align.rotation,
            align.translation
                + Vector3::new(
                    (rng.gen::<f64>() - 0.5) * 10.0,
                    (rng.gen::<f64>() - 0.5) * 10.0,
                    (rng.gen::<f64>() - 0.5) * 10.0,
                ),
        );
        assert!(objective(&perturbed) >= best);
    }
}

#[test]
fn rmse_matches_hand_computation() {
    let gt = orbit(40);
    let est = jitter(&gt, 2.0, 3);
    let t = SimilarityTransform::rigid(
        UnitQuaternion::from_euler_angles(0.1, 0.2, -0.3),
        Vector3::new(1.0, 2.0, 3.0),
    );
    let rmse = trajectory_rmse(&est, &gt, &t).unwrap();
    let mut acc = 0.0;
    for (e, g) in est.poses.iter().zip(&gt.poses) {
        acc += (t.apply_point(&e.center()) - g.center()).norm_squared();
    }
    let expected = (acc / est.poses.len() as f64).sqrt();
    assert!((rmse - expected).abs() < 1e-12);
}

#[test]
fn rmse_is_invariant_under_common_rigid_motion() {
    let gt = orbit(60);
    let est = jitter(&gt, 1.5, 11);
    let (align, _) = align_trajectories(&est, &gt).unwrap();
    let rmse = trajectory_rmse(&est, &gt, &align).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let common = random_rigid(&mut rng, 1.0, 100.0);
    let est2 = common.apply_trajectory(&est);
    let gt2 = common.apply_trajectory(&gt);
    // Conjugated alignment maps est2 onto gt2 identically.
    let conjugated = common.compose(&align).compose(&common.inverse());
    let rmse2 = trajectory_rmse(&est2, &gt2, &conjugated).unwrap();
    assert!((rmse - rmse2).abs() < 1e-9, "{rmse} vs {rmse2}");
}

#[test]
fn depth_map_matches_analytic_ray_sphere() {
    let radius = 50.0;
    let mesh = uv_sphere(Point3::origin(), radius, 128, 64);
    let pose = look_at_pose(0, Point3::new(150.0, -40.0, 60.0), Point3::origin()).unwrap();
    let intr = depthforge_core::pose::CameraIntrinsics {
        fx: 500.0,
        fy: 500.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    };
    let map = rasterize_depth(&mesh, &intr, &pose).unwrap();
    assert!(map.covered_pixels() > 10_000);

    let center_cam = pose.world_to_camera(&Point3::origin());
    let d_min = pose.center().coords.norm() - radius;
    let mut close = 0usize;
    let mut covered = 0usize;
    for py in 0..480u32 {
        for px in 0..640u32 {
            let d = map.at(px, py);
            if d <= 0.0 {
                continue;
            }
            covered += 1;
            assert!(d >= d_min - 1e-9, "through-surface depth {d} < {d_min}");
            // Analytic ray-sphere in camera space; dir has z = 1, so the
            // ray parameter equals camera depth.
            let dir = intr.pixel_ray(px as f64 + 0.5, py as f64 + 0.5);
            let oc = -center_cam.coords;
            let a = dir.norm_squared();
            let b = 2.0 * oc.dot(&dir);
            let c = oc.norm_squared() - radius * radius;
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let t = (-b - disc.sqrt()) / (2.0 * a);
                if (d - t).abs() < 0.5 {
                    close += 1;
                }
            }
        }
    }
    assert!(
        close as f64 >= 0.99 * covered as f64,
        "only {close}/{covered} within 0.5 mm"
    );
}

#[test]
fn single_pose_rmse_trivials() {
    let a = Trajectory {
        poses: vec![CameraPose::new(
            7,
            UnitQuaternion::<f64>::identity(),
            Vector3::zeros(),
        )],
    };
    let mut b = a.clone();
    b.poses[0].translation = Vector3::new(0.0, 3.0, 0.0);
    let rmse = trajectory_rmse(&a, &b, &SimilarityTransform::identity()).unwrap();
    assert_eq!(rmse, 3.0);
}

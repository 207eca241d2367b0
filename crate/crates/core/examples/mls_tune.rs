use depthforge_core::cloud::PointCloud;
use depthforge_core::mls::{estimate_normals, mls_project, KernelSpec, MlsParams};
use nalgebra::{Point3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sphere_cloud(n: usize, radius: f64, seed: u64) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut normals = Vec::new();
    while points.len() < n {
        let v = Vector3::new(rng.sample::<f64,_>(StandardNormal), rng.sample::<f64,_>(StandardNormal), rng.sample::<f64,_>(StandardNormal));
        let norm = v.norm();
        if norm < 1e-6 { continue; }
        let dir = v / norm;
        points.push(Point3::from(dir * radius));
        normals.push(Unit::new_unchecked(dir));
    }
    PointCloud { points, normals: Some(normals), source_frames: None }
}

fn fib_sphere(n: usize, radius: f64) -> PointCloud<f64> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let points: Vec<Point3<f64>> = (0..n).map(|i| {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = std::f64::consts::TAU * (i as f64 / golden).fract();
        Point3::new(radius * r * phi.cos(), radius * r * phi.sin(), radius * z)
    }).collect();
    PointCloud::from_points(points)
}

fn add_noise(cloud: &PointCloud<f64>, sigma: f64, seed: u64) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = cloud.clone();
    for p in &mut out.points {
        *p += Vector3::new(sigma * rng.sample::<f64,_>(StandardNormal), sigma * rng.sample::<f64,_>(StandardNormal), sigma * rng.sample::<f64,_>(StandardNormal));
    }
    out
}

fn rms(cloud: &PointCloud<f64>, r: f64) -> f64 {
    (cloud.points.iter().map(|p| (p.coords.norm() - r).powi(2)).sum::<f64>() / cloud.len() as f64).sqrt()
}

fn main() {
    // Normal estimation on random vs fibonacci sphere.
    for (name, cloud) in [("random", sphere_cloud(500, 50.0, 7)), ("fib", fib_sphere(500, 50.0))] {
        for k in [8, 10, 12, 16] {
            let est = estimate_normals(&cloud, k).unwrap();
            let good = cloud.points.iter().zip(est.cloud.normals.as_ref().unwrap())
                .filter(|(p, n)| n.dot(&p.coords.normalize()).abs().acos().to_degrees() < 5.0).count();
            print!("{name} k={k}: {:.1}%  ", 100.0 * good as f64 / 500.0);
        }
        println!();
    }
    // Noise reduction sweeps.
    for sigma in [0.5, 1.0, 2.0] {
        for (k, h) in [(12, 6.0), (16, 6.0), (20, 6.0), (24, 8.0), (20, 8.0)] {
            let mut worst = 0.0f64; let mut worst_pre = 0.0;
            for seed in 0..5 {
                let clean = sphere_cloud(2000, 50.0, 1000 + seed);
                let noisy = add_noise(&clean, sigma, 2000 + seed);
                let params = MlsParams { kernel: KernelSpec { bandwidth: h }, poly_degree: 2, neighbor_count: k };
                let out = mls_project(&noisy, &params).unwrap();
                let post = rms(&out.cloud, 50.0);
                if post > worst { worst = post; worst_pre = rms(&noisy, 50.0); }
            }
            print!("s={sigma} k={k} h={h}: post {:.3} (pre {:.3}, bound {:.3})  ", worst, worst_pre, 0.6*sigma+0.1);
        }
        println!();
    }
    // Quadratic reproduction vs coefficient scale.
    for scale in [1.0, 0.1, 0.05, 0.02] {
        let q = |x: f64, y: f64| scale * (0.01 * x * x + 0.004 * x * y + 0.008 * y * y);
        let mut pts = Vec::new();
        for i in 0..21 { for j in 0..21 {
            let (x, y) = (i as f64 * 2.0 - 20.0, j as f64 * 2.0 - 20.0);
            pts.push(Point3::new(x, y, q(x, y)));
        }}
        let cloud = PointCloud::from_points(pts);
        let params = MlsParams { kernel: KernelSpec { bandwidth: 6.0 }, poly_degree: 2, neighbor_count: 16 };
        let out = mls_project(&cloud, &params).unwrap();
        let worst = out.cloud.points.iter().zip(&cloud.points).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("quad scale {scale}: max displacement {worst:.3e}");
    }
}

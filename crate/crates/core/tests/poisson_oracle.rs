//! Poisson-stage oracles: manufactured solution, analytic sphere fields,
//! conservation and equivariance properties.

use depthforge_core::cloud::PointCloud;
use depthforge_core::poisson::{
    bspline3, extract_isosurface, poisson_reconstruct, select_isovalue, solve_indicator,
    splat_vector_field, GridSpec, PoissonParams, ScalarField, VectorField,
};
use nalgebra::{Point3, Unit, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sphere_cloud(n: usize, radius: f64, seed: u64) -> PointCloud<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut normals = Vec::new();
    while points.len() < n {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let norm = v.norm();
        if norm < 1e-6 {
            continue;
        }
        let dir = v / norm;
        points.push(Point3::from(dir * radius));
        normals.push(Unit::new_unchecked(dir));
    }
    PointCloud {
        points,
        normals: Some(normals),
        source_frames: None,
    }
}

/// `chi` on the sphere grid with the raw (outward-normal) field.
fn sphere_indicator(n: usize, radius: f64) -> (ScalarField<f64>, PointCloud<f64>) {
    let cloud = sphere_cloud(n, radius, 5);
    let aabb = depthforge_core::aabb::Aabb::from_points(cloud.points.iter()).unwrap();
    let grid = GridSpec::enclose(&aabb, 64, 4).unwrap();
    let field = splat_vector_field(&cloud, &grid).unwrap();
    let (chi, _) = solve_indicator(&field).unwrap();
    (chi, cloud)
}

#[test]
fn manufactured_bump_recovers_potential() {
    // phi = (1 - s^2)^4 inside s < 1, s = |x - c| / support; V = grad phi.
    let dims = [64usize, 64, 64];
    let grid = GridSpec {
        origin: Point3::new(0.0, 0.0, 0.0),
        cell_size: 1.0,
        dims,
    };
    let center = Vector3::new(31.5, 31.5, 31.5);
    let support = 16.0;
    let phi = |p: Vector3<f64>| -> f64 {
        let s2 = (p - center).norm_squared() / (support * support);
        if s2 >= 1.0 {
            0.0
        } else {
            (1.0 - s2).powi(4)
        }
    };
    let grad_phi = |p: Vector3<f64>| -> Vector3<f64> {
        let d = p - center;
        let s2 = d.norm_squared() / (support * support);
        if s2 >= 1.0 {
            Vector3::zeros()
        } else {
            d * (-8.0 * (1.0 - s2).powi(3) / (support * support))
        }
    };

    let mut values = vec![Vector3::zeros(); grid.node_count()];
    let mut exact = vec![0.0; grid.node_count()];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = Vector3::new(i as f64, j as f64, k as f64);
                values[grid.flat(i, j, k)] = grad_phi(p);
                exact[grid.flat(i, j, k)] = phi(p);
            }
        }
    }
    let field = VectorField { grid, values };
    let (chi, stats) = solve_indicator(&field).unwrap();
    assert!(
        stats.relative_residual < 1e-8,
        "residual {}",
        stats.relative_residual
    );

    let mut err_sq = 0.0;
    let mut ref_sq = 0.0;
    for (got, want) in chi.values.iter().zip(&exact) {
        err_sq += (got - want).powi(2);
        ref_sq += want.powi(2);
    }
    let rel = (err_sq / ref_sq).sqrt();
    assert!(rel < 0.05, "relative L2 error {rel}");
}

#[test]
fn cg_satisfies_discrete_laplacian_directly() {
    // Independent check: apply the 7-point Laplacian to chi and compare with
    // the central-difference divergence of V.
    let cloud = sphere_cloud(1500, 40.0, 9);
    let aabb = depthforge_core::aabb::Aabb::from_points(cloud.points.iter()).unwrap();
    let grid = GridSpec::enclose(&aabb, 48, 4).unwrap();
    let field = splat_vector_field(&cloud, &grid).unwrap();
    let (chi, _) = solve_indicator(&field).unwrap();

    let [nx, ny, nz] = grid.dims;
    let h = grid.cell_size;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for k in 1..nz - 1 {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let c = grid.flat(i, j, k);
                let lap = (chi.values[grid.flat(i + 1, j, k)]
                    + chi.values[grid.flat(i - 1, j, k)]
                    + chi.values[grid.flat(i, j + 1, k)]
                    + chi.values[grid.flat(i, j - 1, k)]
                    + chi.values[grid.flat(i, j, k + 1)]
                    + chi.values[grid.flat(i, j, k - 1)]
                    - 6.0 * chi.values[c])
                    / (h * h);
                let div = (field.values[grid.flat(i + 1, j, k)].x
                    - field.values[grid.flat(i - 1, j, k)].x
                    + field.values[grid.flat(i, j + 1, k)].y
                    - field.values[grid.flat(i, j - 1, k)].y
                    + field.values[grid.flat(i, j, k + 1)].z
                    - field.values[grid.flat(i, j, k - 1)].z)
                    / (2.0 * h);
                num += (lap - div).powi(2);
                den += div.powi(2);
            }
        }
    }
    let rel = (num / den).sqrt();
    assert!(rel < 1e-8, "Laplacian consistency {rel}");
}

#[test]
fn splat_conserves_each_component_and_stays_interior() {
    let cloud = sphere_cloud(2000, 50.0, 3);
    let aabb = depthforge_core::aabb::Aabb::from_points(cloud.points.iter()).unwrap();
    let grid = GridSpec::enclose(&aabb, 64, 4).unwrap();
    let field = splat_vector_field(&cloud, &grid).unwrap();

    // Component-wise conservation: splat weights sum to one per point.
    let mut total = Vector3::zeros();
    for v in &field.values {
        total += v;
    }
    let mut expected = Vector3::zeros();
    for n in cloud.normals.as_ref().unwrap() {
        expected += n.into_inner();
    }
    assert!(
        (total - expected).norm() <= 1e-9 * cloud.len() as f64,
        "conservation violated: {total:?} vs {expected:?}"
    );

    // Boundary flux: with 4 cells of padding the support is fully interior.
    let [nx, ny, nz] = grid.dims;
    let mut boundary_mass = 0.0f64;
    let mut total_mass = 0.0f64;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let m = field.values[grid.flat(i, j, k)].norm();
                total_mass += m;
                if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                    boundary_mass += m;
                }
            }
        }
    }
    assert!(boundary_mass < 1e-6 * total_mass);
}

#[test]
fn sphere_chi_changes_level_across_surface() {
    let radius = 50.0;
    let (chi, _) = sphere_indicator(2000, radius);
    let probes = sphere_cloud(300, radius * 0.5, 11);
    let mean_at = |cloud: &PointCloud<f64>| -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for p in &cloud.points {
            if let Some(v) = chi.sample(p) {
                acc += v;
                count += 1;
            }
        }
        acc / count as f64
    };
    let inner = mean_at(&probes);
    let outer = mean_at(&sphere_cloud(300, radius * 1.5, 12));
    // Outward normals make chi lower inside than outside.
    let range = chi.values.iter().cloned().fold(f64::MIN, f64::max)
        - chi.values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        outer - inner > 0.25 * range,
        "inner {inner}, outer {outer}, range {range}"
    );
}

#[test]
fn isovalue_surface_has_mean_radius_near_sphere() {
    let radius = 50.0;
    let (chi, cloud) = sphere_indicator(2000, radius);
    let isovalue = select_isovalue(&chi, &cloud).unwrap();
    let mesh = extract_isosurface(&chi, isovalue).largest_component();
    assert!(!mesh.is_empty());
    let mean_r: f64 =
        mesh.vertices.iter().map(|v| v.coords.norm()).sum::<f64>() / mesh.vertices.len() as f64;
    assert!(
        (mean_r - radius).abs() < 2.0 * chi.grid.cell_size,
        "mean radius {mean_r}, cell {}",
        chi.grid.cell_size
    );
}

#[test]
fn clean_sphere_reconstruction_is_tight_and_closed() {
    let cloud = sphere_cloud(5000, 50.0, 21);
    let out = poisson_reconstruct(&cloud, &PoissonParams::default()).unwrap();
    assert_eq!(out.mesh.boundary_edge_count(), 0, "mesh not closed");
    let rms: f64 = (out
        .mesh
        .vertices
        .iter()
        .map(|v| (v.coords.norm() - 50.0).powi(2))
        .sum::<f64>()
        / out.mesh.vertices.len() as f64)
        .sqrt();
    assert!(rms < 1.5, "RMS radial deviation {rms}");
    // Outward winding comes from the indicator orientation.
    let outward = (0..out.mesh.triangles.len())
        .filter_map(|t| {
            let n = out.mesh.triangle_normal(t)?;
            let [a, b, c] = out.mesh.triangle_vertices(t);
            Some(n.dot(&((a.coords + b.coords + c.coords) / 3.0)) > 0.0)
        })
        .filter(|&ok| ok)
        .count();
    assert!(outward as f64 > 0.99 * out.mesh.triangles.len() as f64);
}

#[test]
fn reconstruction_is_translation_equivariant() {
    let cloud = sphere_cloud(1200, 30.0, 33);
    let t = Vector3::new(8.0, -16.0, 32.0); // exactly representable
    let mut moved = cloud.clone();
    for p in &mut moved.points {
        *p += t;
    }
    let params = PoissonParams {
        resolution: 48,
        padding: 4,
    };
    let a = poisson_reconstruct(&cloud, &params).unwrap();
    let b = poisson_reconstruct(&moved, &params).unwrap();
    assert_eq!(a.mesh.triangles, b.mesh.triangles);
    assert_eq!(a.mesh.vertices.len(), b.mesh.vertices.len());
    for (va, vb) in a.mesh.vertices.iter().zip(&b.mesh.vertices) {
        assert!((va + t - vb).norm() < 1e-9, "va {va:?} vb {vb:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bspline_weights_partition_unity(g in -1000.0f64..1000.0) {
        let base = g.floor() - 1.0;
        let sum: f64 = (0..4).map(|o| bspline3(g - (base + o as f64))).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }
}

//! Deterministic synthetic scenes: ground-truth primitive meshes, orbiting
//! camera trajectories, and SLAM-like sparse observations with configurable
//! corruption (anisotropic noise, outliers, global scale).
//!
//! All randomness comes from ChaCha8 with explicit substreams keyed by frame
//! or point index, so results are bit-identical regardless of evaluation
//! order.

use nalgebra::{Matrix3, Point3, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::PathBuf;

use crate::aabb::Aabb;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::meshquery::MeshQuery;
use crate::pose::{CameraIntrinsics, CameraPose, Trajectory};
use crate::transform::SimilarityTransform;
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive<R: Real> {
    Sphere { radius: R },
    Ellipsoid { semi_axes: Vector3<R> },
    MeshFile { path: PathBuf },
}

/// Camera orbit on a spherical cap: azimuth sweeps one revolution while
/// elevation oscillates sinusoidally between the configured bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitParams<R: Real> {
    pub target: Point3<R>,
    pub radius: R,
    /// Elevation bounds in radians, each within (-pi/2, pi/2).
    pub elev_min: R,
    pub elev_max: R,
    /// Number of elevation oscillations over the sweep.
    pub elev_cycles: R,
    pub n_frames: usize,
    pub fps: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<R: Real> {
    pub primitive: Primitive<R>,
    /// UV tessellation: azimuthal slices and polar stacks.
    pub slices: usize,
    pub stacks: usize,
    pub orbit: OrbitParams<R>,
    pub intrinsics: CameraIntrinsics<R>,
    pub seed: u64,
}

impl<R: Real> SceneSpec<R> {
    /// Sphere of radius 50 mm watched from a 150 mm orbit.
    pub fn sphere_preset() -> Self {
        Self {
            primitive: Primitive::Sphere {
                radius: R::of_f64(50.0),
            },
            slices: 64,
            stacks: 32,
            orbit: OrbitParams {
                target: Point3::origin(),
                radius: R::of_f64(150.0),
                elev_min: R::of_f64(-35.0f64.to_radians()),
                elev_max: R::of_f64(35.0f64.to_radians()),
                elev_cycles: R::of_f64(2.0),
                n_frames: 300,
                fps: R::of_f64(30.0),
            },
            intrinsics: CameraIntrinsics {
                fx: R::of_f64(500.0),
                fy: R::of_f64(500.0),
                cx: R::of_f64(320.0),
                cy: R::of_f64(240.0),
                width: 640,
                height: 480,
            },
            seed: 42,
        }
    }

    /// Liver-scale ellipsoid: 140 mm longest diameter, 900 frames at 30 fps.
    pub fn liver_preset() -> Self {
        Self {
            primitive: Primitive::Ellipsoid {
                semi_axes: Vector3::new(R::of_f64(70.0), R::of_f64(50.0), R::of_f64(40.0)),
            },
            slices: 64,
            stacks: 32,
            orbit: OrbitParams {
                target: Point3::origin(),
                radius: R::of_f64(280.0),
                elev_min: R::of_f64(-40.0f64.to_radians()),
                elev_max: R::of_f64(40.0f64.to_radians()),
                elev_cycles: R::of_f64(2.0),
                n_frames: 900,
                fps: R::of_f64(30.0),
            },
            intrinsics: CameraIntrinsics {
                fx: R::of_f64(800.0),
                fy: R::of_f64(800.0),
                cx: R::of_f64(512.0),
                cy: R::of_f64(384.0),
                width: 1024,
                height: 768,
            },
            seed: 42,
        }
    }
}

/// SLAM-noise surrogate: Gaussian noise stretched along the viewing ray,
/// uniform outliers in the inflated bounding box, and a global scale factor
/// modelling the monocular scale ambiguity.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionSpec<R: Real> {
    /// Noise std along the viewing ray (mm).
    pub sigma_ray: R,
    /// Noise std on each of the two lateral axes (mm).
    pub sigma_lat: R,
    /// Fraction of points replaced by box outliers, in [0, 1).
    pub outlier_fraction: f64,
    pub global_scale: R,
    pub seed: u64,
}

impl<R: Real> CorruptionSpec<R> {
    pub fn clean(seed: u64) -> Self {
        Self {
            sigma_ray: R::zero(),
            sigma_lat: R::zero(),
            outlier_fraction: 0.0,
            global_scale: R::one(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_ray < R::zero() || self.sigma_lat < R::zero() {
            return Err(Error::invalid_parameter("sigma", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::invalid_parameter(
                "outlier_fraction",
                "must be in [0, 1)",
            ));
        }
        if self.global_scale <= R::zero() {
            return Err(Error::invalid_parameter("global_scale", "must be positive"));
        }
        Ok(())
    }
}

/// UV sphere with outward winding. Poles sit on the +-z axis.
pub fn uv_sphere<R: Real>(
    center: Point3<R>,
    radius: R,
    slices: usize,
    stacks: usize,
) -> TriangleMesh<R> {
    ellipsoid(center, Vector3::new(radius, radius, radius), slices, stacks)
}

/// UV-tessellated ellipsoid with outward winding.
pub fn ellipsoid<R: Real>(
    center: Point3<R>,
    semi_axes: Vector3<R>,
    slices: usize,
    stacks: usize,
) -> TriangleMesh<R> {
    let slices = slices.max(3);
    let stacks = stacks.max(2);
    let mut vertices = Vec::with_capacity((stacks - 1) * slices + 2);
    let pi = R::of_f64(std::f64::consts::PI);
    let two_pi = R::of_f64(std::f64::consts::TAU);

    let top = Point3::new(center.x, center.y, center.z + semi_axes.z);
    vertices.push(top);
    for ring in 1..stacks {
        let theta = pi * R::of_usize(ring) / R::of_usize(stacks);
        let (sin_t, cos_t) = (theta.sin(), theta.cos());
        for s in 0..slices {
            let phi = two_pi * R::of_usize(s) / R::of_usize(slices);
            vertices.push(Point3::new(
                center.x + semi_axes.x * sin_t * phi.cos(),
                center.y + semi_axes.y * sin_t * phi.sin(),
                center.z + semi_axes.z * cos_t,
            ));
        }
    }
    let bottom = Point3::new(center.x, center.y, center.z - semi_axes.z);
    vertices.push(bottom);
    let bottom_idx = (vertices.len() - 1) as u32;

    let ring_start = |ring: usize| 1 + (ring - 1) * slices;
    let mut triangles = Vec::with_capacity(2 * slices * (stacks - 1));
    for s in 0..slices {
        let s1 = (s + 1) % slices;
        // Top cap: counterclockwise seen from outside.
        triangles.push([0, (ring_start(1) + s) as u32, (ring_start(1) + s1) as u32]);
    }
    for ring in 1..stacks - 1 {
        let a = ring_start(ring);
        let b = ring_start(ring + 1);
        for s in 0..slices {
            let s1 = (s + 1) % slices;
            triangles.push([(a + s) as u32, (b + s) as u32, (b + s1) as u32]);
            triangles.push([(a + s) as u32, (b + s1) as u32, (a + s1) as u32]);
        }
    }
    let last = ring_start(stacks - 1);
    for s in 0..slices {
        let s1 = (s + 1) % slices;
        triangles.push([bottom_idx, (last + s1) as u32, (last + s) as u32]);
    }
    TriangleMesh::new(vertices, triangles)
}

/// Axis-aligned cuboid with each face tessellated into a `subdiv x subdiv`
/// grid, outward winding.
pub fn cuboid<R: Real>(
    center: Point3<R>,
    half_extents: Vector3<R>,
    subdiv: usize,
) -> TriangleMesh<R> {
    let n = subdiv.max(1);
    let mut vertices: Vec<Point3<R>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    // Face corners are computed with identical arithmetic on adjacent faces,
    // so welding by exact coordinate bits closes the box.
    let mut weld: std::collections::HashMap<[u64; 3], u32> = std::collections::HashMap::new();
    let mut vertex_id = |vertices: &mut Vec<Point3<R>>, p: Point3<R>| -> u32 {
        let key = [p.x.f64().to_bits(), p.y.f64().to_bits(), p.z.f64().to_bits()];
        *weld.entry(key).or_insert_with(|| {
            vertices.push(p);
            (vertices.len() - 1) as u32
        })
    };
    // (axis, sign): normal direction of each face.
    for (axis, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)] {
        let sign = R::of_f64(sign);
        let (ua, va) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut ids = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                let a = R::of_usize(i) / R::of_usize(n) * R::of_f64(2.0) - R::one();
                let b = R::of_usize(j) / R::of_usize(n) * R::of_f64(2.0) - R::one();
                let mut p = center;
                p[axis] += sign * half_extents[axis];
                p[ua] += a * half_extents[ua];
                p[va] += b * half_extents[va];
                ids.push(vertex_id(&mut vertices, p));
            }
        }
        let cols = n + 1;
        for i in 0..n {
            for j in 0..n {
                let quad = [
                    ids[i * cols + j],
                    ids[i * cols + j + 1],
                    ids[(i + 1) * cols + j + 1],
                    ids[(i + 1) * cols + j],
                ];
                // Flip winding on positive faces to keep normals outward.
                if sign > R::zero() {
                    triangles.push([quad[0], quad[2], quad[1]]);
                    triangles.push([quad[0], quad[3], quad[2]]);
                } else {
                    triangles.push([quad[0], quad[1], quad[2]]);
                    triangles.push([quad[0], quad[2], quad[3]]);
                }
            }
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Builds the ground-truth mesh of the scene.
pub fn make_primitive<R: Real>(spec: &SceneSpec<R>) -> Result<TriangleMesh<R>> {
    match &spec.primitive {
        Primitive::Sphere { radius } => {
            if *radius <= R::zero() {
                return Err(Error::invalid_parameter("radius", "must be positive"));
            }
            Ok(uv_sphere(Point3::origin(), *radius, spec.slices, spec.stacks))
        }
        Primitive::Ellipsoid { semi_axes } => {
            if semi_axes.iter().any(|&a| a <= R::zero()) {
                return Err(Error::invalid_parameter("semi_axes", "must be positive"));
            }
            Ok(ellipsoid(
                Point3::origin(),
                *semi_axes,
                spec.slices,
                spec.stacks,
            ))
        }
        Primitive::MeshFile { path } => crate::io::read_triangle_mesh(path),
    }
}

/// Pose looking from `center` at `target` with +z world up; camera axes are
/// x-right, y-down, z-forward.
pub fn look_at_pose<R: Real>(
    frame_id: u32,
    center: Point3<R>,
    target: Point3<R>,
) -> Result<CameraPose<R>> {
    let forward = Unit::try_new(target - center, R::of_f64(1e-12))
        .ok_or_else(|| Error::InvalidData("camera center coincides with target".into()))?;
    let up = Vector3::z();
    let right = Unit::try_new(forward.cross(&up), R::of_f64(1e-9)).ok_or_else(|| {
        Error::InvalidData("camera forward axis is parallel to the up vector".into())
    })?;
    let down = forward.cross(&right);
    let m = Matrix3::from_columns(&[right.into_inner(), down, forward.into_inner()]);
    Ok(CameraPose::new(
        frame_id,
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m)),
        center.coords,
    ))
}

/// Camera orbit around the target; frame ids run 0..n_frames-1.
pub fn orbit_trajectory<R: Real>(spec: &SceneSpec<R>) -> Result<Trajectory<R>> {
    let orbit = &spec.orbit;
    if orbit.n_frames < 2 {
        return Err(Error::invalid_parameter("n_frames", "must be at least 2"));
    }
    if orbit.radius <= R::zero() {
        return Err(Error::invalid_parameter("orbit radius", "must be positive"));
    }
    let limit = R::of_f64(80.0f64.to_radians());
    if orbit.elev_min.abs() > limit || orbit.elev_max.abs() > limit {
        return Err(Error::invalid_parameter(
            "elevation",
            "must stay within +-80 degrees to keep the up vector valid",
        ));
    }
    let mid = (orbit.elev_min + orbit.elev_max) * R::of_f64(0.5);
    let amp = (orbit.elev_max - orbit.elev_min) * R::of_f64(0.5);
    let two_pi = R::of_f64(std::f64::consts::TAU);
    let mut poses = Vec::with_capacity(orbit.n_frames);
    for i in 0..orbit.n_frames {
        let s = R::of_usize(i) / R::of_usize(orbit.n_frames - 1);
        let azimuth = two_pi * s;
        let elev = mid + amp * (two_pi * orbit.elev_cycles * s).sin();
        let dir = Vector3::new(
            elev.cos() * azimuth.cos(),
            elev.cos() * azimuth.sin(),
            elev.sin(),
        );
        let center = orbit.target + dir * orbit.radius;
        poses.push(look_at_pose(i as u32, center, orbit.target)?);
    }
    Ok(Trajectory { poses })
}

/// Samples surface points visible from each pose by casting rays through
/// uniformly random pixels. Each point carries the observing frame id and
/// the geometric normal of the hit triangle.
pub fn sample_visible_points<R: Real>(
    mesh: &TriangleMesh<R>,
    traj: &Trajectory<R>,
    intr: &CameraIntrinsics<R>,
    points_per_frame: usize,
    seed: u64,
) -> Result<PointCloud<R>> {
    if mesh.is_empty() {
        return Err(Error::EmptyInput("mesh"));
    }
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    intr.validate()?;
    let query = MeshQuery::new(mesh);
    let width = intr.width as f64;
    let height = intr.height as f64;

    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut frames = Vec::new();
    for pose in &traj.poses {
        // Substream per frame: parallel or reordered evaluation cannot
        // change the draws.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(pose.frame_id as u64);
        let origin = pose.center();
        for _ in 0..points_per_frame {
            let u = R::of_f64(rng.gen::<f64>() * width);
            let v = R::of_f64(rng.gen::<f64>() * height);
            let dir = pose.rotation * intr.pixel_ray(u, v);
            if let Some(hit) = query.raycast(&origin, &dir, R::of_f64(1e-9), R::of_f64(f64::MAX)) {
                points.push(origin + dir * hit.t);
                normals.push(
                    mesh.triangle_normal(hit.triangle)
                        .expect("sampled triangle is non-degenerate"),
                );
                frames.push(pose.frame_id);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::NoValidSamples("no camera ray hit the mesh"));
    }
    Ok(PointCloud {
        points,
        normals: Some(normals),
        source_frames: Some(frames),
    })
}

/// Output of [`corrupt`]: the corrupted cloud, the scale transform that was
/// applied (for aligning other scene data), and which points became outliers.
#[derive(Debug, Clone)]
pub struct CorruptionOutcome<R: Real> {
    pub cloud: PointCloud<R>,
    /// The global-scale similarity applied to the cloud (identity when
    /// `global_scale` is 1).
    pub scale_transform: SimilarityTransform<R>,
    pub outlier_mask: Vec<bool>,
}

/// Displaces each point anisotropically along/athwart its viewing ray,
/// replaces a fraction with uniform box outliers, and scales the whole cloud
/// about its centroid. Normals and provenance stay those of the clean cloud.
pub fn corrupt<R: Real>(
    cloud: &PointCloud<R>,
    traj: &Trajectory<R>,
    spec: &CorruptionSpec<R>,
) -> Result<CorruptionOutcome<R>> {
    spec.validate()?;
    let frames = cloud
        .source_frames
        .as_ref()
        .ok_or(Error::EmptyInput("cloud source frames"))?;
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let bbox = Aabb::from_points(cloud.points.iter())
        .ok_or(Error::EmptyInput("cloud"))?
        .scaled(R::of_f64(1.5));
    let ext = bbox.extents();

    let mut points = Vec::with_capacity(cloud.len());
    let mut outlier_mask = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let u_outlier = rng.gen::<f64>();
        let g_ray: f64 = rng.sample(StandardNormal);
        let g_lat1: f64 = rng.sample(StandardNormal);
        let g_lat2: f64 = rng.sample(StandardNormal);
        if u_outlier < spec.outlier_fraction {
            let (ux, uy, uz) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            points.push(Point3::new(
                bbox.min.x + ext.x * R::of_f64(ux),
                bbox.min.y + ext.y * R::of_f64(uy),
                bbox.min.z + ext.z * R::of_f64(uz),
            ));
            outlier_mask.push(true);
            continue;
        }
        let pose = traj
            .pose_by_frame(frames[i])
            .or_else(|| traj.nearest_pose(p))
            .expect("non-empty trajectory");
        let ray = Unit::try_new(p - pose.center(), R::of_f64(1e-12))
            .unwrap_or_else(|| Unit::new_unchecked(Vector3::z()));
        let (lat1, lat2) = crate::transform::tangent_basis(&ray);
        let displacement = ray.into_inner() * (spec.sigma_ray * R::of_f64(g_ray))
            + lat1.into_inner() * (spec.sigma_lat * R::of_f64(g_lat1))
            + lat2.into_inner() * (spec.sigma_lat * R::of_f64(g_lat2));
        points.push(p + displacement);
        outlier_mask.push(false);
    }

    let mut out = PointCloud {
        points,
        normals: cloud.normals.clone(),
        source_frames: cloud.source_frames.clone(),
    };
    let scale_transform = if spec.global_scale == R::one() {
        SimilarityTransform::identity()
    } else {
        let centroid = out.centroid().expect("non-empty cloud");
        let t = SimilarityTransform::scaling_about(spec.global_scale, centroid);
        out.points = out.points.iter().map(|p| t.apply_point(p)).collect();
        t
    };
    Ok(CorruptionOutcome {
        cloud: out,
        scale_transform,
        outlier_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_vertices_have_exact_radius() {
        let mesh = uv_sphere(Point3::origin(), 50.0f64, 64, 32);
        mesh.validate().unwrap();
        assert_eq!(mesh.boundary_edge_count(), 0);
        for v in &mesh.vertices {
            assert!((v.coords.norm() - 50.0).abs() < 1e-9);
        }
        // Outward winding.
        for t in 0..mesh.triangles.len() {
            let [a, b, c] = mesh.triangle_vertices(t);
            let centroid = (a.coords + b.coords + c.coords) / 3.0;
            assert!(mesh.triangle_normal(t).unwrap().dot(&centroid) > 0.0);
        }
    }

    #[test]
    fn cuboid_is_closed_with_outward_normals() {
        let c = Point3::new(1.0f64, -2.0, 3.0);
        let mesh = cuboid(c, Vector3::new(30.0, 22.0, 15.0), 4);
        mesh.validate().unwrap();
        assert_eq!(mesh.boundary_edge_count(), 0);
        for t in 0..mesh.triangles.len() {
            let [a, b, cc] = mesh.triangle_vertices(t);
            let centroid = (a.coords + b.coords + cc.coords) / 3.0;
            let outward = centroid - c.coords;
            assert!(mesh.triangle_normal(t).unwrap().dot(&outward) > 0.0);
        }
    }

    #[test]
    fn liver_preset_spans_140mm() {
        let spec = SceneSpec::<f64>::liver_preset();
        let mesh = make_primitive(&spec).unwrap();
        let bbox = Aabb::from_points(mesh.vertices.iter()).unwrap();
        let ext = bbox.extents();
        assert_eq!(ext.x.max(ext.y).max(ext.z), 140.0);
    }

    #[test]
    fn ellipsoid_vertices_satisfy_equation() {
        let semi = Vector3::new(70.0f64, 50.0, 40.0);
        let mesh = ellipsoid(Point3::origin(), semi, 48, 24);
        for v in &mesh.vertices {
            let q = (v.x / semi.x).powi(2) + (v.y / semi.y).powi(2) + (v.z / semi.z).powi(2);
            assert!((q - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_has_constant_radius_and_looks_at_target() {
        let spec = SceneSpec::<f64>::liver_preset();
        let traj = orbit_trajectory(&spec).unwrap();
        assert_eq!(traj.len(), 900);
        traj.validate().unwrap();
        for pose in &traj.poses {
            let to_target = spec.orbit.target - pose.center();
            assert!((to_target.norm() - 280.0).abs() < 1e-9);
            let aligned = pose.forward().dot(&to_target.normalize());
            assert!((aligned - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn camera_looking_away_contributes_nothing() {
        let mesh = uv_sphere(Point3::origin(), 50.0f64, 16, 8);
        let pose =
            look_at_pose(0, Point3::new(150.0, 0.0, 0.0), Point3::new(300.0, 0.0, 0.0)).unwrap();
        let traj = Trajectory { poses: vec![pose] };
        let intr = SceneSpec::<f64>::sphere_preset().intrinsics;
        assert!(sample_visible_points(&mesh, &traj, &intr, 50, 7).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = SceneSpec::<f64>::sphere_preset();
        let mesh = make_primitive(&spec).unwrap();
        let traj = orbit_trajectory(&spec).unwrap();
        let a = sample_visible_points(&mesh, &traj, &spec.intrinsics, 10, spec.seed).unwrap();
        let b = sample_visible_points(&mesh, &traj, &spec.intrinsics, 10, spec.seed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_corruption_is_identity() {
        let spec = SceneSpec::<f64>::sphere_preset();
        let mesh = make_primitive(&spec).unwrap();
        let traj = orbit_trajectory(&spec).unwrap();
        let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 5, 1).unwrap();
        let out = corrupt(&cloud, &traj, &CorruptionSpec::clean(9)).unwrap();
        assert_eq!(out.cloud, cloud);
        assert!(out.outlier_mask.iter().all(|&o| !o));
    }

    #[test]
    fn global_scale_halves_distances() {
        let spec = SceneSpec::<f64>::sphere_preset();
        let mesh = make_primitive(&spec).unwrap();
        let traj = orbit_trajectory(&spec).unwrap();
        let cloud = sample_visible_points(&mesh, &traj, &spec.intrinsics, 5, 1).unwrap();
        let mut cspec = CorruptionSpec::clean(9);
        cspec.global_scale = 0.5;
        let out = corrupt(&cloud, &traj, &cspec).unwrap();
        for i in (0..cloud.len()).step_by(7) {
            for j in (i + 1..cloud.len()).step_by(11) {
                let before = (cloud.points[i] - cloud.points[j]).norm();
                let after = (out.cloud.points[i] - out.cloud.points[j]).norm();
                assert!((after - 0.5 * before).abs() <= 1e-12 * before.max(1.0));
            }
        }
    }

    #[test]
    fn corrupt_requires_provenance() {
        let traj = Trajectory {
            poses: vec![
                look_at_pose(0, Point3::new(100.0f64, 0.0, 50.0), Point3::origin()).unwrap(),
            ],
        };
        let cloud = PointCloud::from_points(vec![Point3::new(0.0f64, 0.0, 0.0)]);
        assert!(corrupt(&cloud, &traj, &CorruptionSpec::clean(1)).is_err());
    }
}

//! Moving-least-squares smoothing: normal estimation, camera-based normal
//! orientation, and projection of each point onto a locally fitted
//! polynomial surface.
//!
//! Projection is the classic two-step procedure: fit a weighted local
//! reference plane by minimizing the weighted sum of squared point-plane
//! distances (the weight follows the moving origin, so the plane is iterated
//! to a fixed point), then fit a bivariate polynomial of the neighbor heights
//! over the plane's tangent frame and move the point to the polynomial value
//! at the origin.

use nalgebra::{DMatrix, DVector, Matrix3, Point3, Unit, Vector3};
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::kdtree::SpatialIndex;
use crate::pose::Trajectory;
use crate::Real;

/// Gaussian kernel `exp(-d^2 / h^2)` with bandwidth `h` in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<R: Real> {
    pub bandwidth: R,
}

impl<R: Real> KernelSpec<R> {
    pub fn weight(&self, dist_sq: R) -> R {
        (-dist_sq / (self.bandwidth * self.bandwidth)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlsParams<R: Real> {
    pub kernel: KernelSpec<R>,
    /// Degree of the bivariate polynomial, 1 to 3.
    pub poly_degree: usize,
    /// Neighborhood size for both the plane and the polynomial fit.
    pub neighbor_count: usize,
}

impl<R: Real> MlsParams<R> {
    pub fn validate(&self) -> Result<()> {
        if self.kernel.bandwidth <= R::zero() {
            return Err(Error::invalid_parameter("bandwidth", "must be positive"));
        }
        if !(1..=3).contains(&self.poly_degree) {
            return Err(Error::invalid_parameter(
                "poly_degree",
                "must be 1, 2 or 3",
            ));
        }
        let needed = basis_size(self.poly_degree);
        if self.neighbor_count < needed {
            return Err(Error::invalid_parameter(
                "neighbor_count",
                format!(
                    "degree {} needs at least {} neighbors, got {}",
                    self.poly_degree, needed, self.neighbor_count
                ),
            ));
        }
        Ok(())
    }
}

/// Number of monomials of a bivariate polynomial of the given degree.
pub fn basis_size(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Local reference frame and fitted polynomial at one projected point.
#[derive(Debug, Clone)]
pub struct MlsLocalFrame<R: Real> {
    /// Plane origin `q`: the fixed point of projecting the input point onto
    /// the moving plane.
    pub origin: Point3<R>,
    pub normal: Unit<Vector3<R>>,
    /// Plane offset `D = q . n`.
    pub offset: R,
    pub tangent_u: Unit<Vector3<R>>,
    pub tangent_v: Unit<Vector3<R>>,
    /// Monomial coefficients ordered 1, u, v, u^2, uv, v^2, ...
    pub poly_coeffs: Vec<R>,
    pub degree: usize,
}

impl<R: Real> MlsLocalFrame<R> {
    /// Height of the fitted polynomial at tangent coordinates `(u, v)`.
    pub fn height(&self, u: R, v: R) -> R {
        let mut acc = R::zero();
        let mut idx = 0;
        for deg in 0..=self.degree {
            for j in 0..=deg {
                acc += self.poly_coeffs[idx] * powi(u, deg - j) * powi(v, j);
                idx += 1;
            }
        }
        acc
    }
}

fn powi<R: Real>(base: R, exp: usize) -> R {
    let mut acc = R::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Result of normal estimation: the cloud with normals attached and a
/// per-point reliability flag (false where the neighborhood covariance was
/// rank deficient).
#[derive(Debug, Clone)]
pub struct EstimatedNormals<R: Real> {
    pub cloud: PointCloud<R>,
    pub reliable: Vec<bool>,
}

/// Eigen-decomposition of a symmetric 3x3, eigenvalues ascending.
fn sorted_eigen<R: Real>(m: &Matrix3<R>) -> ([R; 3], [Vector3<R>; 3]) {
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    (
        [
            eig.eigenvalues[order[0]],
            eig.eigenvalues[order[1]],
            eig.eigenvalues[order[2]],
        ],
        [
            eig.eigenvectors.column(order[0]).into(),
            eig.eigenvectors.column(order[1]).into(),
            eig.eigenvectors.column(order[2]).into(),
        ],
    )
}

struct PlaneFit<R: Real> {
    normal: Unit<Vector3<R>>,
    centroid: Point3<R>,
}

/// Weighted plane through `points`: normal is the smallest eigenvector of
/// the weighted covariance, offset passes through the weighted centroid.
/// `None` when the two smallest eigenvalues coincide within 1e-12 relative
/// (rank-deficient neighborhood).
fn weighted_plane<R: Real>(
    points: &[Point3<R>],
    indices: &[usize],
    weights: &[R],
) -> Option<PlaneFit<R>> {
    let mut wsum = R::zero();
    let mut csum = Vector3::zeros();
    for (&i, &w) in indices.iter().zip(weights) {
        wsum += w;
        csum += points[i].coords * w;
    }
    if wsum <= R::zero() {
        return None;
    }
    let centroid = Point3::from(csum / wsum);
    let mut cov = Matrix3::zeros();
    for (&i, &w) in indices.iter().zip(weights) {
        let d = points[i] - centroid;
        cov += (d * d.transpose()) * w;
    }
    cov /= wsum;
    let (vals, vecs) = sorted_eigen(&cov);
    if is_rank_deficient(&vals) {
        return None;
    }
    Some(PlaneFit {
        normal: Unit::new_normalize(vecs[0]),
        centroid,
    })
}

fn is_rank_deficient<R: Real>(vals: &[R; 3]) -> bool {
    vals[1] - vals[0] <= R::of_f64(1e-12) * vals[1].abs()
}

/// Estimates a unit normal per point as the smallest-eigenvalue direction of
/// the k-nearest-neighbor covariance. Signs are arbitrary at this stage.
pub fn estimate_normals<R: Real>(cloud: &PointCloud<R>, k: usize) -> Result<EstimatedNormals<R>> {
    if k < 3 {
        return Err(Error::invalid_parameter("k", "must be at least 3"));
    }
    if cloud.len() < k {
        return Err(Error::invalid_parameter(
            "k",
            format!("cloud has {} points, need at least k = {}", cloud.len(), k),
        ));
    }
    let index = SpatialIndex::build(cloud);
    let ones = vec![R::one(); k];
    let results: Vec<(Unit<Vector3<R>>, bool)> = cloud
        .points
        .par_iter()
        .map(|p| {
            let nn = index.knn_query(p, k).expect("k >= 1");
            match weighted_plane(&cloud.points, &nn, &ones[..nn.len()]) {
                Some(fit) => (fit.normal, true),
                None => {
                    // Rank-deficient: keep the eigenvector anyway, flag it.
                    let mut csum = Vector3::zeros();
                    for &i in &nn {
                        csum += cloud.points[i].coords;
                    }
                    let c = csum / R::of_usize(nn.len());
                    let mut cov = Matrix3::zeros();
                    for &i in &nn {
                        let d = cloud.points[i].coords - c;
                        cov += d * d.transpose();
                    }
                    let (_, vecs) = sorted_eigen(&cov);
                    (
                        Unit::try_new(vecs[0], R::of_f64(1e-12))
                            .unwrap_or_else(|| Unit::new_unchecked(Vector3::z())),
                        false,
                    )
                }
            }
        })
        .collect();
    let mut out = cloud.clone();
    out.normals = Some(results.iter().map(|(n, _)| *n).collect());
    Ok(EstimatedNormals {
        cloud: out,
        reliable: results.into_iter().map(|(_, r)| r).collect(),
    })
}

/// Flips each normal, if necessary, to face the camera that observed the
/// point: the pose matching `source_frame` when available, otherwise the
/// pose with the nearest camera center.
pub fn orient_normals<R: Real>(cloud: &PointCloud<R>, traj: &Trajectory<R>) -> Result<PointCloud<R>> {
    if traj.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let normals = cloud
        .normals
        .as_ref()
        .ok_or(Error::EmptyInput("cloud normals"))?;
    let oriented: Vec<Unit<Vector3<R>>> = cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let pose = cloud
                .source_frames
                .as_ref()
                .and_then(|fs| traj.pose_by_frame(fs[i]))
                .or_else(|| traj.nearest_pose(p))
                .expect("non-empty trajectory");
            let to_camera = pose.center() - p;
            if normals[i].dot(&to_camera) < R::zero() {
                Unit::new_unchecked(-normals[i].into_inner())
            } else {
                normals[i]
            }
        })
        .collect();
    let mut out = cloud.clone();
    out.normals = Some(oriented);
    Ok(out)
}

/// Output of [`mls_project`]: the projected cloud plus bookkeeping for the
/// run report.
#[derive(Debug, Clone)]
pub struct MlsOutcome<R: Real> {
    pub cloud: PointCloud<R>,
    /// Points passed through unchanged because their fit was unusable.
    pub failed: usize,
    /// Mean displacement of successfully projected points, mm.
    pub mean_displacement: R,
}

const PLANE_ITER_CAP: usize = 20;
const PLANE_MOVE_TOL: f64 = 1e-6;
const MIN_WEIGHT: f64 = 1e-12;

/// Fits the local MLS frame (plane + polynomial) for an arbitrary query
/// position against the indexed cloud. `seed_normal` resolves the plane
/// normal's sign. Returns `None` when the neighborhood cannot support a fit.
pub fn fit_local_frame<R: Real>(
    cloud: &PointCloud<R>,
    index: &SpatialIndex<R>,
    p: &Point3<R>,
    seed_normal: Option<Unit<Vector3<R>>>,
    params: &MlsParams<R>,
) -> Option<MlsLocalFrame<R>> {
    let neighbors = index.knn_query(p, params.neighbor_count).ok()?;
    let needed = basis_size(params.poly_degree);

    let mut q = *p;
    let mut normal: Option<Unit<Vector3<R>>> = seed_normal;
    let mut weights = vec![R::zero(); neighbors.len()];
    for _ in 0..PLANE_ITER_CAP {
        let mut usable = 0;
        for (w, &i) in weights.iter_mut().zip(&neighbors) {
            *w = params.kernel.weight((cloud.points[i] - q).norm_squared());
            if *w > R::of_f64(MIN_WEIGHT) {
                usable += 1;
            }
        }
        if usable < needed {
            return None;
        }
        let fit = weighted_plane(&cloud.points, &neighbors, &weights)?;
        let mut n = fit.normal;
        if let Some(prev) = normal {
            if n.dot(&prev) < R::zero() {
                n = Unit::new_unchecked(-n.into_inner());
            }
        }
        normal = Some(n);
        let offset = n.dot(&fit.centroid.coords);
        let q_new = p - n.into_inner() * (n.dot(&p.coords) - offset);
        let moved = (q_new - q).norm();
        q = q_new;
        if moved < R::of_f64(PLANE_MOVE_TOL) {
            break;
        }
    }
    let normal = normal?;
    let (tangent_u, tangent_v) = crate::transform::tangent_basis(&normal);

    // Weighted least squares of neighbor heights over the tangent frame.
    let m = basis_size(params.poly_degree);
    let rows = neighbors.len();
    let mut a = DMatrix::<R>::zeros(rows, m);
    let mut b = DVector::<R>::zeros(rows);
    for (row, (&i, &w)) in neighbors.iter().zip(&weights).enumerate() {
        let d = cloud.points[i] - q;
        let (u, v, h) = (tangent_u.dot(&d), tangent_v.dot(&d), normal.dot(&d));
        let sw = w.sqrt();
        let mut col = 0;
        for deg in 0..=params.poly_degree {
            for j in 0..=deg {
                a[(row, col)] = powi(u, deg - j) * powi(v, j) * sw;
                col += 1;
            }
        }
        b[row] = h * sw;
    }
    let svd = a.svd(true, true);
    let coeffs = svd.solve(&b, R::of_f64(1e-14)).ok()?;
    if coeffs.iter().any(|c| !c.finite()) {
        return None;
    }

    Some(MlsLocalFrame {
        origin: q,
        normal,
        offset: normal.dot(&q.coords),
        tangent_u,
        tangent_v,
        poly_coeffs: coeffs.iter().copied().collect(),
        degree: params.poly_degree,
    })
}

/// Projects every point onto its local MLS surface. Output size equals input
/// size; points whose fit fails pass through unchanged and are counted.
pub fn mls_project<R: Real>(cloud: &PointCloud<R>, params: &MlsParams<R>) -> Result<MlsOutcome<R>> {
    params.validate()?;
    if cloud.len() < params.neighbor_count {
        return Err(Error::invalid_parameter(
            "neighbor_count",
            format!(
                "cloud has {} points, need at least {}",
                cloud.len(),
                params.neighbor_count
            ),
        ));
    }
    let index = SpatialIndex::build(cloud);

    struct Slot<R: Real> {
        point: Point3<R>,
        normal: Option<Unit<Vector3<R>>>,
        displacement: R,
        failed: bool,
    }

    let slots: Vec<Slot<R>> = cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let seed = cloud.normals.as_ref().map(|ns| ns[i]);
            match fit_local_frame(cloud, &index, p, seed, params) {
                Some(frame) => {
                    let g0 = frame.poly_coeffs[0];
                    let projected = frame.origin + frame.normal.into_inner() * g0;
                    // Surface normal of the height field at the origin:
                    // n - g_u * u - g_v * v, renormalized.
                    let gu = frame.poly_coeffs[1];
                    let gv = frame.poly_coeffs[2];
                    let mut n_new = Unit::new_normalize(
                        frame.normal.into_inner()
                            - frame.tangent_u.into_inner() * gu
                            - frame.tangent_v.into_inner() * gv,
                    );
                    if let Some(seed) = seed {
                        if n_new.dot(&seed) < R::zero() {
                            n_new = Unit::new_unchecked(-n_new.into_inner());
                        }
                    }
                    Slot {
                        point: projected,
                        normal: Some(n_new),
                        displacement: (projected - p).norm(),
                        failed: false,
                    }
                }
                None => Slot {
                    point: *p,
                    normal: cloud.normals.as_ref().map(|ns| ns[i]),
                    displacement: R::zero(),
                    failed: true,
                },
            }
        })
        .collect();

    let failed = slots.iter().filter(|s| s.failed).count();
    let projected_count = cloud.len() - failed;
    let mut total_disp = R::zero();
    for s in &slots {
        total_disp += s.displacement;
    }
    let mean_displacement = if projected_count > 0 {
        total_disp / R::of_usize(projected_count)
    } else {
        R::zero()
    };

    let normals = if cloud.normals.is_some() {
        Some(
            slots
                .iter()
                .map(|s| s.normal.expect("normal present when input has normals"))
                .collect(),
        )
    } else {
        None
    };
    Ok(MlsOutcome {
        cloud: PointCloud {
            points: slots.iter().map(|s| s.point).collect(),
            normals,
            source_frames: cloud.source_frames.clone(),
        },
        failed,
        mean_displacement,
    })
}

//! Poisson indicator-function surface reconstruction on a regular grid.
//!
//! The oriented cloud is splatted into a vector field `V` with tensor-product
//! cubic B-spline weights, the indicator `chi` minimizing `||grad chi - V||^2`
//! is recovered as the 7-point-Laplacian solution of `lap chi = div V` under
//! zero-Dirichlet boundary conditions (conjugate gradient, matrix free), and
//! the surface is the marching-cubes isosurface at the mean of `chi` sampled
//! at the input points.

mod marching;
mod mc_tables;

pub use marching::extract_isosurface;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::aabb::Aabb;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::Real;

/// Minimum number of padding cells between the cloud's bounding box and the
/// grid boundary.
pub const MIN_PADDING: usize = 4;

/// A regular grid of sample nodes: node `(i, j, k)` sits at
/// `origin + (i, j, k) * cell_size`. `dims` counts nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<R: Real> {
    pub origin: Point3<R>,
    pub cell_size: R,
    pub dims: [usize; 3],
}

impl<R: Real> GridSpec<R> {
    /// Builds a grid enclosing `aabb` with `padding` cells of margin on every
    /// side. `resolution` is the node count along the longest axis.
    pub fn enclose(aabb: &Aabb<R>, resolution: usize, padding: usize) -> Result<Self> {
        if padding < MIN_PADDING {
            return Err(Error::invalid_parameter(
                "padding",
                format!("must be at least {MIN_PADDING} cells"),
            ));
        }
        if resolution < 2 * padding + 2 {
            return Err(Error::invalid_parameter(
                "resolution",
                format!("must be at least {} for padding {padding}", 2 * padding + 2),
            ));
        }
        let ext = aabb.extents();
        let longest = ext.x.max(ext.y).max(ext.z);
        if !(longest > R::zero()) {
            return Err(Error::InvalidData(
                "bounding box has zero extent on every axis".into(),
            ));
        }
        let cell_size = longest / R::of_usize(resolution - 1 - 2 * padding);
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let span = (ext[a] / cell_size).f64().ceil() as usize;
            dims[a] = (span + 1 + 2 * padding).max(8);
        }
        let pad = R::of_usize(padding) * cell_size;
        Ok(Self {
            origin: Point3::new(aabb.min.x - pad, aabb.min.y - pad, aabb.min.z - pad),
            cell_size,
            dims,
        })
    }

    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Point3<R> {
        Point3::new(
            self.origin.x + R::of_usize(i) * self.cell_size,
            self.origin.y + R::of_usize(j) * self.cell_size,
            self.origin.z + R::of_usize(k) * self.cell_size,
        )
    }

    /// Continuous grid coordinates of a world point.
    pub fn grid_coords(&self, p: &Point3<R>) -> Vector3<R> {
        (p - self.origin) / self.cell_size
    }
}

#[derive(Debug, Clone)]
pub struct VectorField<R: Real> {
    pub grid: GridSpec<R>,
    pub values: Vec<Vector3<R>>,
}

#[derive(Debug, Clone)]
pub struct ScalarField<R: Real> {
    pub grid: GridSpec<R>,
    pub values: Vec<R>,
}

impl<R: Real> ScalarField<R> {
    /// Trilinear interpolation; `None` outside the grid.
    pub fn sample(&self, p: &Point3<R>) -> Option<R> {
        let g = self.grid.grid_coords(p);
        let dims = self.grid.dims;
        let mut base = [0usize; 3];
        let mut frac = [R::zero(); 3];
        for a in 0..3 {
            let x = g[a].f64();
            if !(0.0..=(dims[a] - 1) as f64).contains(&x) {
                return None;
            }
            let b = (x.floor() as usize).min(dims[a] - 2);
            base[a] = b;
            frac[a] = g[a] - R::of_usize(b);
        }
        let mut acc = R::zero();
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = |f: R, d: usize| if d == 1 { f } else { R::one() - f };
                    let weight = w(frac[0], dx) * w(frac[1], dy) * w(frac[2], dz);
                    acc += weight
                        * self.values[self.grid.flat(base[0] + dx, base[1] + dy, base[2] + dz)];
                }
            }
        }
        Some(acc)
    }
}

/// Uniform cubic B-spline centered at 0 with support `[-2, 2]`.
#[inline]
pub fn bspline3<R: Real>(t: R) -> R {
    let a = t.abs();
    let one = R::one();
    let two = R::of_f64(2.0);
    if a < one {
        R::of_f64(0.5) * a * a * a - a * a + R::of_f64(2.0 / 3.0)
    } else if a < two {
        let b = two - a;
        b * b * b / R::of_f64(6.0)
    } else {
        R::zero()
    }
}

/// Per-axis B-spline support of a coordinate: the base node index and the 4
/// weights on nodes `base..base+3`.
#[inline]
fn spline_support<R: Real>(coord: R, dim: usize) -> Option<(usize, [R; 4])> {
    let base = coord.f64().floor() as i64 - 1;
    if base < 0 || base + 3 > (dim - 1) as i64 {
        return None;
    }
    let mut w = [R::zero(); 4];
    for (o, slot) in w.iter_mut().enumerate() {
        *slot = bspline3(coord - R::of_usize(base as usize + o));
    }
    Some((base as usize, w))
}

/// Distributes each point's unit normal onto its 4x4x4 node neighborhood
/// with tensor-product cubic B-spline weights (which sum to one, so the
/// splat conserves each normal component in total).
pub fn splat_vector_field<R: Real>(
    cloud: &PointCloud<R>,
    grid: &GridSpec<R>,
) -> Result<VectorField<R>> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or(Error::EmptyInput("cloud normals"))?;
    let mut values = vec![Vector3::zeros(); grid.node_count()];
    for (idx, (p, n)) in cloud.points.iter().zip(normals).enumerate() {
        let g = grid.grid_coords(p);
        let sx = spline_support(g.x, grid.dims[0]);
        let sy = spline_support(g.y, grid.dims[1]);
        let sz = spline_support(g.z, grid.dims[2]);
        let ((bx, wx), (by, wy), (bz, wz)) = match (sx, sy, sz) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::PointOutsideGrid { index: idx }),
        };
        let n = n.into_inner();
        for (oz, &wz) in wz.iter().enumerate() {
            for (oy, &wy) in wy.iter().enumerate() {
                let wyz = wy * wz;
                for (ox, &wx) in wx.iter().enumerate() {
                    values[grid.flat(bx + ox, by + oy, bz + oz)] += n * (wx * wyz);
                }
            }
        }
    }
    Ok(VectorField {
        grid: *grid,
        values,
    })
}

/// Outcome of the conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `lap chi = div V` on the grid with zero-Dirichlet boundary,
/// returning the indicator field and solver statistics.
///
/// The conjugate gradient runs matrix free on the negated (positive
/// definite) Laplacian to relative residual `1e-8`, capped at
/// `10 * max(dims)` iterations.
pub fn solve_indicator<R: Real>(field: &VectorField<R>) -> Result<(ScalarField<R>, SolveStats)> {
    let grid = field.grid;
    let [nx, ny, nz] = grid.dims;
    let n = grid.node_count();
    let h = grid.cell_size;
    let two_h = h * R::of_f64(2.0);
    let inv_h2 = R::one() / (h * h);

    // rhs = -div(V) on interior nodes (central differences); we solve
    // (-lap) chi = -div so the operator is positive definite.
    let mut rhs = vec![R::zero(); n];
    let slab = nx * ny;
    rhs.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
        if k == 0 || k == nz - 1 {
            return;
        }
        let v = &field.values;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let c = grid.flat(i, j, k);
                let div = (v[c + 1].x - v[c - 1].x
                    + v[c + nx].y
                    - v[c - nx].y
                    + v[c + slab].z
                    - v[c - slab].z)
                    / two_h;
                chunk[c - k * slab] = -div;
            }
        }
    });

    let norm_sq = |a: &[R]| -> R {
        let mut acc = R::zero();
        for &x in a {
            acc += x * x;
        }
        acc
    };
    let dot = |a: &[R], b: &[R]| -> R {
        let mut acc = R::zero();
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    };

    let rhs_norm = norm_sq(&rhs).sqrt();
    let mut x = vec![R::zero(); n];
    if rhs_norm == R::zero() {
        return Ok((
            ScalarField {
                grid,
                values: x,
            },
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }

    // Matrix-free application of the negated 7-point Laplacian on interior
    // nodes; boundary entries stay zero (Dirichlet).
    let apply = |input: &[R], output: &mut [R]| {
        output.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
            if k == 0 || k == nz - 1 {
                for o in chunk.iter_mut() {
                    *o = R::zero();
                }
                return;
            }
            for j in 0..ny {
                for i in 0..nx {
                    let c = grid.flat(i, j, k);
                    let o = &mut chunk[c - k * slab];
                    if j == 0 || j == ny - 1 || i == 0 || i == nx - 1 {
                        *o = R::zero();
                        continue;
                    }
                    let sum = input[c - 1]
                        + input[c + 1]
                        + input[c - nx]
                        + input[c + nx]
                        + input[c - slab]
                        + input[c + slab];
                    *o = (R::of_f64(6.0) * input[c] - sum) * inv_h2;
                }
            }
        });
    };

    let max_iters = 10 * nx.max(ny).max(nz);
    let tol = R::of_f64(1e-8) * rhs_norm;

    let mut r = rhs.clone();
    let mut p = rhs;
    let mut ap = vec![R::zero(); n];
    let mut r_sq = norm_sq(&r);
    let mut iterations = 0;
    while iterations < max_iters {
        if r_sq.sqrt() <= tol {
            break;
        }
        apply(&p, &mut ap);
        let alpha = r_sq / dot(&p, &ap);
        x.par_iter_mut().zip(p.par_iter()).for_each(|(x, &p)| {
            *x += alpha * p;
        });
        r.par_iter_mut().zip(ap.par_iter()).for_each(|(r, &ap)| {
            *r -= alpha * ap;
        });
        let r_sq_new = norm_sq(&r);
        let beta = r_sq_new / r_sq;
        r_sq = r_sq_new;
        p.par_iter_mut().zip(r.par_iter()).for_each(|(p, &r)| {
            *p = r + beta * *p;
        });
        iterations += 1;
    }

    let relative_residual = (r_sq.sqrt() / rhs_norm).f64();
    if relative_residual >= 1e-8 && iterations >= max_iters {
        return Err(Error::SolverDidNotConverge {
            residual: relative_residual,
            iterations,
        });
    }
    Ok((
        ScalarField {
            grid,
            values: x,
        },
        SolveStats {
            iterations,
            relative_residual,
        },
    ))
}

/// The mean of `chi` trilinearly interpolated at the input point positions:
/// the level at which the isosurface follows the samples.
pub fn select_isovalue<R: Real>(chi: &ScalarField<R>, cloud: &PointCloud<R>) -> Result<R> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("cloud"));
    }
    let mut acc = R::zero();
    for (idx, p) in cloud.points.iter().enumerate() {
        acc += chi
            .sample(p)
            .ok_or(Error::PointOutsideGrid { index: idx })?;
    }
    Ok(acc / R::of_usize(cloud.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    /// Grid nodes along the longest axis of the padded domain.
    pub resolution: usize,
    /// Padding cells around the cloud's bounding box.
    pub padding: usize,
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self {
            resolution: 64,
            padding: MIN_PADDING,
        }
    }
}

/// End-to-end reconstruction outcome, including the report-level numbers.
#[derive(Debug, Clone)]
pub struct PoissonOutcome<R: Real> {
    pub mesh: TriangleMesh<R>,
    pub grid: GridSpec<R>,
    pub isovalue: R,
    pub solve: SolveStats,
    /// Connected components in the raw extraction, before keeping the largest.
    pub components: usize,
}

/// Splat, solve, pick the isovalue, extract, and keep the largest connected
/// component. The splatted normals are negated so that `chi` behaves like an
/// indicator (larger inside) and the extracted triangles wind outward.
pub fn poisson_reconstruct<R: Real>(
    cloud: &PointCloud<R>,
    params: &PoissonParams,
) -> Result<PoissonOutcome<R>> {
    if cloud.len() < 100 {
        return Err(Error::invalid_parameter(
            "cloud",
            format!("needs at least 100 oriented points, got {}", cloud.len()),
        ));
    }
    if cloud.normals.is_none() {
        return Err(Error::EmptyInput("cloud normals"));
    }
    let aabb = Aabb::from_points(cloud.points.iter()).expect("non-empty cloud");
    let grid = GridSpec::enclose(&aabb, params.resolution, params.padding)?;
    let mut field = splat_vector_field(cloud, &grid)?;
    for v in &mut field.values {
        *v = -*v;
    }
    let (chi, solve) = solve_indicator(&field)?;
    let isovalue = select_isovalue(&chi, cloud)?;
    let mesh = extract_isosurface(&chi, isovalue);
    let components = mesh.component_count();
    Ok(PoissonOutcome {
        mesh: mesh.largest_component(),
        grid,
        isovalue,
        solve,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Unit;

    #[test]
    fn grid_encloses_with_padding() {
        let aabb = Aabb {
            min: Point3::new(0.0f64, 0.0, 0.0),
            max: Point3::new(100.0, 50.0, 30.0),
        };
        let grid = GridSpec::enclose(&aabb, 64, 4).unwrap();
        assert_eq!(grid.dims[0], 64);
        assert!(grid.dims.iter().all(|&d| d >= 8));
        // Min corner is `padding` cells inside.
        let g = grid.grid_coords(&aabb.min);
        assert!((g.x - 4.0).abs() < 1e-12);
        // Max corner leaves at least `padding` cells of margin.
        let g = grid.grid_coords(&aabb.max);
        for a in 0..3 {
            assert!(g[a] <= (grid.dims[a] - 1 - 4) as f64 + 1e-12);
        }
    }

    #[test]
    fn bspline_partition_of_unity() {
        for i in 0..50 {
            let g = -2.0 + 0.17 * i as f64; // arbitrary fractional coordinates
            let base = g.floor() - 1.0;
            let sum: f64 = (0..4).map(|o| bspline3(g - (base + o as f64))).sum();
            assert!((sum - 1.0).abs() < 1e-12, "g={g} sum={sum}");
        }
    }

    #[test]
    fn single_point_splat_partitions_unity() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let mut cloud = PointCloud::from_points(vec![Point3::new(4.0, 4.0, 4.0)]);
        cloud.normals = Some(vec![Unit::new_unchecked(Vector3::z())]);
        let field = splat_vector_field(&cloud, &grid).unwrap();
        let total_z: f64 = field.values.iter().map(|v| v.z).sum();
        assert!((total_z - 1.0).abs() < 1e-12);
        assert!(field.values.iter().all(|v| v.z >= 0.0 && v.x == 0.0 && v.y == 0.0));
        // Support confined to the 4^3 neighborhood around the node.
        for (i, v) in field.values.iter().enumerate() {
            if v.z != 0.0 {
                let (x, y, z) = (i % 9, (i / 9) % 9, i / 81);
                assert!((3..=5).contains(&x) && (3..=5).contains(&y) && (3..=5).contains(&z));
            }
        }
    }

    #[test]
    fn splat_rejects_point_outside() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let mut cloud = PointCloud::from_points(vec![Point3::new(0.5, 4.0, 4.0)]);
        cloud.normals = Some(vec![Unit::new_unchecked(Vector3::z())]);
        match splat_vector_field(&cloud, &grid) {
            Err(Error::PointOutsideGrid { index }) => assert_eq!(index, 0),
            other => panic!("expected PointOutsideGrid, got {other:?}"),
        }
    }

    #[test]
    fn empty_cloud_splats_zero_field() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let mut cloud = PointCloud::<f64>::default();
        cloud.normals = Some(vec![]);
        let field = splat_vector_field(&cloud, &grid).unwrap();
        assert!(field.values.iter().all(|v| v == &Vector3::zeros()));
    }

    #[test]
    fn zero_field_solves_to_zero() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let field = VectorField {
            grid,
            values: vec![Vector3::zeros(); grid.node_count()],
        };
        let (chi, stats) = solve_indicator(&field).unwrap();
        assert!(chi.values.iter().all(|&v| v == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn constant_field_isovalue() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let chi = ScalarField {
            grid,
            values: vec![2.5; grid.node_count()],
        };
        let cloud = PointCloud::from_points(vec![
            Point3::new(4.0, 4.0, 4.0),
            Point3::new(2.3, 5.1, 6.7),
        ]);
        let iso = select_isovalue(&chi, &cloud).unwrap();
        assert!((iso - 2.5).abs() < 1e-12);
        assert!(select_isovalue(&chi, &PointCloud::default()).is_err());
    }

    #[test]
    fn linear_field_isovalue_is_symmetric_midpoint() {
        let grid = GridSpec {
            origin: Point3::new(0.0f64, 0.0, 0.0),
            cell_size: 1.0,
            dims: [9, 9, 9],
        };
        let mut values = vec![0.0; grid.node_count()];
        for k in 0..9 {
            for j in 0..9 {
                for i in 0..9 {
                    values[grid.flat(i, j, k)] = k as f64;
                }
            }
        }
        let chi = ScalarField { grid, values };
        // Points symmetric about z = 4.
        let cloud = PointCloud::from_points(vec![
            Point3::new(4.0, 4.0, 3.0),
            Point3::new(4.0, 4.0, 5.0),
        ]);
        let iso = select_isovalue(&chi, &cloud).unwrap();
        assert!((iso - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_requires_oriented_points() {
        let cloud = PointCloud::from_points(vec![Point3::new(0.0f64, 0.0, 0.0); 50]);
        assert!(poisson_reconstruct(&cloud, &PoissonParams::default()).is_err());
    }
}

//! Marching cubes over a scalar grid with exact vertex welding.

use nalgebra::Point3;
use std::collections::HashMap;

use super::mc_tables::{EDGE_CORNERS, EDGE_TABLE, TRI_TABLE};
use super::ScalarField;
use crate::mesh::TriangleMesh;
use crate::Real;

/// Corner `c` of a cell at offset `CORNER_OFFSETS[c]` from its base node.
/// Corners 0..3 ring the bottom face counterclockwise (seen from +z),
/// corners 4..7 the top face, matching the lookup tables.
const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Extracts the isosurface of `chi` at `isovalue` with the 256-case table.
///
/// Vertices are placed by linear interpolation along crossed cell edges and
/// welded exactly via (node, axis) edge keys, so shared edges reference a
/// single vertex and interior surfaces come out watertight. Triangles wind
/// so their geometric normal points toward decreasing `chi - isovalue`. An
/// isovalue outside the field's range yields an empty mesh.
pub fn extract_isosurface<R: Real>(chi: &ScalarField<R>, isovalue: R) -> TriangleMesh<R> {
    let grid = chi.grid;
    let [nx, ny, nz] = grid.dims;
    let mut mesh = TriangleMesh::default();
    if nx < 2 || ny < 2 || nz < 2 {
        return mesh;
    }

    // Vertex index per canonical edge key (base node flat index, axis).
    let mut edge_vertices: HashMap<(usize, u8), u32> = HashMap::new();
    let mut corner_values = [R::zero(); 8];

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut cube_index = 0usize;
                for (c, off) in CORNER_OFFSETS.iter().enumerate() {
                    let v = chi.values[grid.flat(i + off[0], j + off[1], k + off[2])];
                    corner_values[c] = v;
                    if v < isovalue {
                        cube_index |= 1 << c;
                    }
                }
                if EDGE_TABLE[cube_index] == 0 {
                    continue;
                }

                let row = &TRI_TABLE[cube_index];
                let mut e = 0;
                while row[e] >= 0 {
                    let tri = [row[e] as usize, row[e + 1] as usize, row[e + 2] as usize];
                    let mut ids = [0u32; 3];
                    for (slot, &edge) in ids.iter_mut().zip(&tri) {
                        *slot = edge_vertex(
                            chi,
                            &mut edge_vertices,
                            &mut mesh.vertices,
                            [i, j, k],
                            edge,
                            &corner_values,
                            isovalue,
                        );
                    }
                    // Table order winds normals toward decreasing chi - isovalue.
                    mesh.triangles.push(ids);
                    e += 3;
                }
            }
        }
    }
    mesh
}

#[allow(clippy::too_many_arguments)]
fn edge_vertex<R: Real>(
    chi: &ScalarField<R>,
    edge_vertices: &mut HashMap<(usize, u8), u32>,
    vertices: &mut Vec<Point3<R>>,
    cell: [usize; 3],
    edge: usize,
    corner_values: &[R; 8],
    isovalue: R,
) -> u32 {
    let (ca, cb) = EDGE_CORNERS[edge];
    let oa = CORNER_OFFSETS[ca];
    let ob = CORNER_OFFSETS[cb];
    let axis = (0..3).find(|&a| oa[a] != ob[a]).expect("corners differ");
    // Canonical orientation: interpolate from the lower node along `axis`.
    let (lo, lo_val, hi_val) = if oa[axis] < ob[axis] {
        (oa, corner_values[ca], corner_values[cb])
    } else {
        (ob, corner_values[cb], corner_values[ca])
    };
    let node = [cell[0] + lo[0], cell[1] + lo[1], cell[2] + lo[2]];
    let key = (chi.grid.flat(node[0], node[1], node[2]), axis as u8);
    if let Some(&id) = edge_vertices.get(&key) {
        return id;
    }
    let t = ((isovalue - lo_val) / (hi_val - lo_val))
        .max(R::zero())
        .min(R::one());
    let mut p = chi.grid.node_position(node[0], node[1], node[2]);
    p[axis] += t * chi.grid.cell_size;
    vertices.push(p);
    let id = (vertices.len() - 1) as u32;
    edge_vertices.insert(key, id);
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::GridSpec;

    fn field_from(f: impl Fn(f64, f64, f64) -> f64, dims: [usize; 3]) -> ScalarField<f64> {
        let grid = GridSpec {
            origin: Point3::new(0.0, 0.0, 0.0),
            cell_size: 1.0,
            dims,
        };
        let mut values = vec![0.0; grid.node_count()];
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    values[grid.flat(i, j, k)] = f(i as f64, j as f64, k as f64);
                }
            }
        }
        ScalarField { grid, values }
    }

    #[test]
    fn linear_field_gives_flat_plane_with_downhill_normals() {
        let chi = field_from(|_, _, z| z - 3.5, [9, 9, 9]);
        let mesh = extract_isosurface(&chi, 0.0);
        assert!(!mesh.is_empty());
        mesh.validate().unwrap();
        for v in &mesh.vertices {
            assert!((v.z - 3.5).abs() < 1e-9, "vertex z = {}", v.z);
        }
        // Normals must point toward decreasing field, i.e. -z.
        for t in 0..mesh.triangles.len() {
            let n = mesh.triangle_normal(t).expect("non-degenerate");
            assert!(n.z < -0.99, "normal {n:?}");
        }
    }

    #[test]
    fn sphere_sdf_is_closed_and_round() {
        let c = [8.0, 8.0, 8.0];
        let r = 5.0;
        let chi = field_from(
            |x, y, z| {
                r - ((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2)).sqrt()
            },
            [17, 17, 17],
        );
        let mesh = extract_isosurface(&chi, 0.0);
        mesh.validate().unwrap();
        assert_eq!(mesh.boundary_edge_count(), 0, "mesh not closed");
        for v in &mesh.vertices {
            let rv = ((v.x - c[0]).powi(2) + (v.y - c[1]).powi(2) + (v.z - c[2]).powi(2)).sqrt();
            assert!((rv - r).abs() <= 1.0, "vertex radius {rv}");
        }
        // Field decreases outward, so normals must point outward. Exact node
        // hits produce a few zero-area triangles; those have no normal.
        for t in 0..mesh.triangles.len() {
            let Some(n) = mesh.triangle_normal(t) else {
                continue;
            };
            let [a, b, cc] = mesh.triangle_vertices(t);
            let centroid = (a.coords + b.coords + cc.coords) / 3.0;
            let outward = centroid - nalgebra::Vector3::new(c[0], c[1], c[2]);
            assert!(n.dot(&outward) > 0.0);
        }
    }

    #[test]
    fn strictly_positive_field_yields_empty_mesh() {
        let chi = field_from(|_, _, _| 2.0, [9, 9, 9]);
        assert!(extract_isosurface(&chi, 0.0).is_empty());
        // Isovalue outside [min, max]: also empty, not an error.
        assert!(extract_isosurface(&chi, 5.0).is_empty());
    }
}

//! Closest-point and ray queries against a triangle mesh, accelerated by a
//! median-split AABB tree.

use nalgebra::{Point3, Vector3};

use crate::aabb::Aabb;
use crate::mesh::TriangleMesh;
use crate::Real;

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy)]
pub struct ClosestPoint<R: Real> {
    pub point: Point3<R>,
    pub triangle: usize,
    pub distance_sq: R,
}

/// Result of a ray query.
#[derive(Debug, Clone, Copy)]
pub struct RayHit<R: Real> {
    /// Ray parameter of the hit: `hit = origin + t * dir`.
    pub t: R,
    pub triangle: usize,
}

enum BvhNode<R: Real> {
    Leaf {
        aabb: Aabb<R>,
        start: usize,
        count: usize,
    },
    Inner {
        aabb: Aabb<R>,
        left: usize,
        right: usize,
    },
}

impl<R: Real> BvhNode<R> {
    fn aabb(&self) -> &Aabb<R> {
        match self {
            BvhNode::Leaf { aabb, .. } | BvhNode::Inner { aabb, .. } => aabb,
        }
    }
}

/// Read-only query structure over a borrowed mesh.
pub struct MeshQuery<'a, R: Real> {
    mesh: &'a TriangleMesh<R>,
    nodes: Vec<BvhNode<R>>,
    /// Triangle indices, permuted so each leaf owns a contiguous range.
    order: Vec<u32>,
    root: Option<usize>,
}

const LEAF_SIZE: usize = 8;

impl<'a, R: Real> MeshQuery<'a, R> {
    pub fn new(mesh: &'a TriangleMesh<R>) -> Self {
        let mut order: Vec<u32> = (0..mesh.triangles.len() as u32).collect();
        let centroids: Vec<Point3<R>> = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.triangle_vertices(t);
                Point3::from((a.coords + b.coords + c.coords) / R::of_f64(3.0))
            })
            .collect();
        let tri_boxes: Vec<Aabb<R>> = (0..mesh.triangles.len())
            .map(|t| {
                let vs = mesh.triangle_vertices(t);
                Aabb::from_points(vs.iter()).expect("triangle has vertices")
            })
            .collect();
        let mut nodes = Vec::new();
        let root = if order.is_empty() {
            None
        } else {
            let len = order.len();
            Some(Self::build(
                &mut nodes,
                &mut order,
                0,
                len,
                &centroids,
                &tri_boxes,
            ))
        };
        Self {
            mesh,
            nodes,
            order,
            root,
        }
    }

    fn build(
        nodes: &mut Vec<BvhNode<R>>,
        order: &mut [u32],
        start: usize,
        count: usize,
        centroids: &[Point3<R>],
        tri_boxes: &[Aabb<R>],
    ) -> usize {
        let slice = &mut order[start..start + count];
        let mut aabb = tri_boxes[slice[0] as usize];
        for &t in slice.iter().skip(1) {
            aabb = aabb.merge(&tri_boxes[t as usize]);
        }
        if count <= LEAF_SIZE {
            nodes.push(BvhNode::Leaf { aabb, start, count });
            return nodes.len() - 1;
        }
        // Split at the median centroid along the widest axis.
        let ext = aabb.extents();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = count / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a as usize][axis]
                .partial_cmp(&centroids[b as usize][axis])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let left = Self::build(nodes, order, start, mid, centroids, tri_boxes);
        let right = Self::build(nodes, order, start + mid, count - mid, centroids, tri_boxes);
        let aabb = nodes[left].aabb().merge(nodes[right].aabb());
        nodes.push(BvhNode::Inner { aabb, left, right });
        nodes.len() - 1
    }

    /// Closest point on the mesh surface to `p`.
    pub fn closest_point(&self, p: &Point3<R>) -> Option<ClosestPoint<R>> {
        let root = self.root?;
        let mut best = ClosestPoint {
            point: *p,
            triangle: usize::MAX,
            distance_sq: R::of_f64(f64::MAX),
        };
        self.closest_rec(root, p, &mut best);
        (best.triangle != usize::MAX).then_some(best)
    }

    fn closest_rec(&self, node: usize, p: &Point3<R>, best: &mut ClosestPoint<R>) {
        match &self.nodes[node] {
            BvhNode::Leaf { start, count, .. } => {
                for &t in &self.order[*start..*start + *count] {
                    let vs = self.mesh.triangle_vertices(t as usize);
                    let q = closest_point_on_triangle(p, &vs[0], &vs[1], &vs[2]);
                    let d = (q - p).norm_squared();
                    if d < best.distance_sq {
                        *best = ClosestPoint {
                            point: q,
                            triangle: t as usize,
                            distance_sq: d,
                        };
                    }
                }
            }
            BvhNode::Inner { left, right, .. } => {
                let dl = self.nodes[*left].aabb().distance_sq(p);
                let dr = self.nodes[*right].aabb().distance_sq(p);
                let (first, second, d_first, d_second) = if dl <= dr {
                    (*left, *right, dl, dr)
                } else {
                    (*right, *left, dr, dl)
                };
                if d_first < best.distance_sq {
                    self.closest_rec(first, p, best);
                }
                if d_second < best.distance_sq {
                    self.closest_rec(second, p, best);
                }
            }
        }
    }

    /// Nearest intersection of the ray `origin + t * dir` with the mesh for
    /// `t in (t_min, t_max)`. `dir` need not be normalized.
    pub fn raycast(
        &self,
        origin: &Point3<R>,
        dir: &Vector3<R>,
        t_min: R,
        t_max: R,
    ) -> Option<RayHit<R>> {
        let root = self.root?;
        let inv_dir = Vector3::new(R::one() / dir.x, R::one() / dir.y, R::one() / dir.z);
        let mut best: Option<RayHit<R>> = None;
        self.raycast_rec(root, origin, dir, &inv_dir, t_min, t_max, &mut best);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn raycast_rec(
        &self,
        node: usize,
        origin: &Point3<R>,
        dir: &Vector3<R>,
        inv_dir: &Vector3<R>,
        t_min: R,
        t_max: R,
        best: &mut Option<RayHit<R>>,
    ) {
        let limit = best.map_or(t_max, |h| h.t);
        match &self.nodes[node] {
            BvhNode::Leaf { aabb, start, count } => {
                if aabb.ray_entry(origin, inv_dir, limit).is_none() {
                    return;
                }
                for &t in &self.order[*start..*start + *count] {
                    let vs = self.mesh.triangle_vertices(t as usize);
                    if let Some(hit_t) = ray_triangle(origin, dir, &vs[0], &vs[1], &vs[2]) {
                        let cur_limit = best.map_or(t_max, |h| h.t);
                        if hit_t > t_min && hit_t < cur_limit {
                            *best = Some(RayHit {
                                t: hit_t,
                                triangle: t as usize,
                            });
                        }
                    }
                }
            }
            BvhNode::Inner { left, right, .. } => {
                let tl = self.nodes[*left].aabb().ray_entry(origin, inv_dir, limit);
                let tr = self.nodes[*right].aabb().ray_entry(origin, inv_dir, limit);
                let children = match (tl, tr) {
                    (Some(a), Some(b)) if a <= b => [Some(*left), Some(*right)],
                    (Some(_), Some(_)) => [Some(*right), Some(*left)],
                    (Some(_), None) => [Some(*left), None],
                    (None, Some(_)) => [Some(*right), None],
                    (None, None) => [None, None],
                };
                for child in children.into_iter().flatten() {
                    self.raycast_rec(child, origin, dir, inv_dir, t_min, t_max, best);
                }
            }
        }
    }
}

/// Closest point on triangle (a, b, c) to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle<R: Real>(
    p: &Point3<R>,
    a: &Point3<R>,
    b: &Point3<R>,
    c: &Point3<R>,
) -> Point3<R> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= R::zero() && d2 <= R::zero() {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= R::zero() && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= R::zero() && d1 >= R::zero() && d3 <= R::zero() {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= R::zero() && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= R::zero() && d2 >= R::zero() && d6 <= R::zero() {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= R::zero() && (d4 - d3) >= R::zero() && (d5 - d6) >= R::zero() {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = R::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Moller-Trumbore ray-triangle intersection; returns the ray parameter.
pub fn ray_triangle<R: Real>(
    origin: &Point3<R>,
    dir: &Vector3<R>,
    a: &Point3<R>,
    b: &Point3<R>,
    c: &Point3<R>,
) -> Option<R> {
    let eps = R::of_f64(1e-12);
    let ab = b - a;
    let ac = c - a;
    let pvec = dir.cross(&ac);
    let det = ab.dot(&pvec);
    if det.abs() < eps {
        return None;
    }
    let inv_det = R::one() / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if u < R::zero() || u > R::one() {
        return None;
    }
    let qvec = tvec.cross(&ab);
    let v = dir.dot(&qvec) * inv_det;
    if v < R::zero() || u + v > R::one() {
        return None;
    }
    Some(ac.dot(&qvec) * inv_det)
}

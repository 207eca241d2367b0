//! Balanced k-d tree over point-cloud positions.
//!
//! Queries are contractually set-identical to a brute-force scan: radius
//! queries are inclusive (`d <= radius`) and k-nearest-neighbor ties are
//! broken by ascending point index, so results are deterministic across
//! platforms.

use nalgebra::Point3;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::Real;

struct Node<R: Real> {
    point: Point3<R>,
    index: u32,
    axis: u8,
    left: Option<u32>,
    right: Option<u32>,
}

/// Immutable spatial acceleration structure; queries are read-only and may
/// run concurrently.
pub struct SpatialIndex<R: Real> {
    nodes: Vec<Node<R>>,
    root: Option<u32>,
}

/// Convenience wrapper matching the operation-style API.
pub fn build_spatial_index<R: Real>(cloud: &PointCloud<R>) -> SpatialIndex<R> {
    SpatialIndex::build(cloud)
}

impl<R: Real> SpatialIndex<R> {
    pub fn build(cloud: &PointCloud<R>) -> Self {
        let mut entries: Vec<(Point3<R>, u32)> = cloud
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        let mut nodes = Vec::with_capacity(entries.len());
        let root = Self::build_rec(&mut entries, 0, &mut nodes);
        Self { nodes, root }
    }

    fn build_rec(
        entries: &mut [(Point3<R>, u32)],
        depth: usize,
        nodes: &mut Vec<Node<R>>,
    ) -> Option<u32> {
        if entries.is_empty() {
            return None;
        }
        let axis = (depth % 3) as u8;
        let mid = entries.len() / 2;
        entries.select_nth_unstable_by(mid, |a, b| {
            a.0[axis as usize]
                .partial_cmp(&b.0[axis as usize])
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let (point, index) = entries[mid];
        let (lo, hi) = entries.split_at_mut(mid);
        let left = Self::build_rec(lo, depth + 1, nodes);
        let right = Self::build_rec(&mut hi[1..], depth + 1, nodes);
        nodes.push(Node {
            point,
            index,
            axis,
            left,
            right,
        });
        Some((nodes.len() - 1) as u32)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Indices of all points with `||p - center|| <= radius` (boundary
    /// inclusive). Result order is unspecified.
    pub fn radius_query(&self, center: &Point3<R>, radius: R) -> Result<Vec<usize>> {
        if radius <= R::zero() {
            return Err(Error::invalid_parameter("radius", "must be positive"));
        }
        let mut out = Vec::new();
        if let Some(root) = self.root {
            self.radius_rec(root, center, radius * radius, &mut out);
        }
        Ok(out)
    }

    fn radius_rec(&self, node: u32, center: &Point3<R>, r_sq: R, out: &mut Vec<usize>) {
        let n = &self.nodes[node as usize];
        if (n.point - center).norm_squared() <= r_sq {
            out.push(n.index as usize);
        }
        let axis = n.axis as usize;
        let diff = center[axis] - n.point[axis];
        let (near, far) = if diff < R::zero() {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        if let Some(child) = near {
            self.radius_rec(child, center, r_sq, out);
        }
        // The far side can still hold boundary points at exactly `radius`.
        if diff * diff <= r_sq {
            if let Some(child) = far {
                self.radius_rec(child, center, r_sq, out);
            }
        }
    }

    /// The `k` nearest points to `center` by Euclidean distance, ties broken
    /// by ascending index. Returns the whole cloud if it has fewer than `k`
    /// points. Result is sorted by (distance, index).
    pub fn knn_query(&self, center: &Point3<R>, k: usize) -> Result<Vec<usize>> {
        if k == 0 {
            return Err(Error::invalid_parameter("k", "must be at least 1"));
        }
        let mut heap: BinaryHeap<HeapEntry<R>> = BinaryHeap::with_capacity(k + 1);
        if let Some(root) = self.root {
            self.knn_rec(root, center, k, &mut heap);
        }
        let mut out: Vec<HeapEntry<R>> = heap.into_vec();
        out.sort_unstable();
        Ok(out.into_iter().map(|e| e.index as usize).collect())
    }

    fn knn_rec(&self, node: u32, center: &Point3<R>, k: usize, heap: &mut BinaryHeap<HeapEntry<R>>) {
        let n = &self.nodes[node as usize];
        let d_sq = (n.point - center).norm_squared();
        let candidate = HeapEntry {
            dist_sq: d_sq,
            index: n.index,
        };
        if heap.len() < k {
            heap.push(candidate);
        } else if candidate < *heap.peek().expect("non-empty heap") {
            heap.pop();
            heap.push(candidate);
        }
        let axis = n.axis as usize;
        let diff = center[axis] - n.point[axis];
        let (near, far) = if diff < R::zero() {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        if let Some(child) = near {
            self.knn_rec(child, center, k, heap);
        }
        // Equality matters: a far-side point at the same distance can win on index.
        let explore_far = heap.len() < k
            || diff * diff <= heap.peek().expect("non-empty heap").dist_sq;
        if explore_far {
            if let Some(child) = far {
                self.knn_rec(child, center, k, heap);
            }
        }
    }
}

/// Max-heap entry ordered lexicographically by (distance, index).
struct HeapEntry<R: Real> {
    dist_sq: R,
    index: u32,
}

impl<R: Real> PartialEq for HeapEntry<R> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<R: Real> Eq for HeapEntry<R> {}
impl<R: Real> PartialOrd for HeapEntry<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<R: Real> Ord for HeapEntry<R> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .partial_cmp(&other.dist_sq)
            .unwrap_or(Ordering::Equal)
            .then(self.index.cmp(&other.index))
    }
}

//! Indexed triangle meshes.

use nalgebra::{Point3, Unit, Vector3};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::Real;

/// An indexed triangle surface in millimetres.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh<R: Real> {
    pub vertices: Vec<Point3<R>>,
    pub triangles: Vec<[u32; 3]>,
}

impl<R: Real> TriangleMesh<R> {
    pub fn new(vertices: Vec<Point3<R>>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            vertices,
            triangles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Checks finite coordinates, in-range indices and non-degenerate triangles.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !(v.x.finite() && v.y.finite() && v.z.finite()) {
                return Err(Error::InvalidData(format!(
                    "vertex {i} has a non-finite coordinate"
                )));
            }
        }
        let n = self.vertices.len() as u32;
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&idx| idx >= n) {
                return Err(Error::InvalidData(format!(
                    "triangle {i} references a vertex index out of range"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidData(format!(
                    "triangle {i} is degenerate (repeated vertex index)"
                )));
            }
        }
        Ok(())
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point3<R>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Geometric (winding-derived) normal of triangle `t`; `None` if the
    /// triangle has zero area.
    pub fn triangle_normal(&self, t: usize) -> Option<Unit<Vector3<R>>> {
        let [a, b, c] = self.triangle_vertices(t);
        Unit::try_new((b - a).cross(&(c - a)), R::of_f64(1e-30))
    }

    /// Number of edges used by exactly one triangle. Zero means the surface
    /// is closed.
    pub fn boundary_edge_count(&self) -> usize {
        let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let key = if a < b { (a, b) } else { (b, a) };
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts.values().filter(|&&c| c == 1).count()
    }

    /// Splits the mesh into connected components (triangles joined through
    /// shared vertices) and returns the one with the most triangles.
    /// Unreferenced vertices are dropped and indices remapped.
    pub fn largest_component(&self) -> Self {
        if self.triangles.is_empty() {
            return self.clone();
        }
        let mut uf = UnionFind::new(self.vertices.len());
        for t in &self.triangles {
            uf.union(t[0] as usize, t[1] as usize);
            uf.union(t[1] as usize, t[2] as usize);
        }
        let mut tri_count: HashMap<usize, usize> = HashMap::new();
        for t in &self.triangles {
            *tri_count.entry(uf.find(t[0] as usize)).or_insert(0) += 1;
        }
        let best_root = self
            .triangles
            .iter()
            .map(|t| uf.find(t[0] as usize))
            .max_by_key(|root| (tri_count[root], usize::MAX - root))
            .expect("non-empty triangle list");

        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(tri_count[&best_root]);
        for t in &self.triangles {
            if uf.find(t[0] as usize) != best_root {
                continue;
            }
            let mut mapped = [0u32; 3];
            for (slot, &old) in mapped.iter_mut().zip(t.iter()) {
                *slot = *remap.entry(old).or_insert_with(|| {
                    vertices.push(self.vertices[old as usize]);
                    (vertices.len() - 1) as u32
                });
            }
            triangles.push(mapped);
        }
        Self {
            vertices,
            triangles,
        }
    }

    /// Number of connected components over shared vertices that contain at
    /// least one triangle.
    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for t in &self.triangles {
            uf.union(t[0] as usize, t[1] as usize);
            uf.union(t[1] as usize, t[2] as usize);
        }
        let mut roots: Vec<usize> = self.triangles.iter().map(|t| uf.find(t[0] as usize)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

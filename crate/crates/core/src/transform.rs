//! Similarity transforms: scale, rotation, translation.
//!
//! With `scale == 1` this is the rigid transform returned by ICP; with a free
//! scale it carries the monocular-scale trajectory alignment.

use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};

use crate::cloud::PointCloud;
use crate::mesh::TriangleMesh;
use crate::pose::Trajectory;
use crate::Real;

/// Deterministic right-handed tangent frame `{u, v, n}` for a unit vector:
/// `u x v = n`. `u` derives from the world axis least aligned with `n`.
pub fn tangent_basis<R: Real>(n: &Unit<Vector3<R>>) -> (Unit<Vector3<R>>, Unit<Vector3<R>>) {
    let n = n.into_inner();
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = Unit::new_normalize(n.cross(&axis));
    let v = Unit::new_unchecked(n.cross(&u.into_inner()));
    (u, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform<R: Real> {
    pub scale: R,
    pub rotation: UnitQuaternion<R>,
    pub translation: Vector3<R>,
}

impl<R: Real> Default for SimilarityTransform<R> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<R: Real> SimilarityTransform<R> {
    pub fn identity() -> Self {
        Self {
            scale: R::one(),
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(scale: R, rotation: UnitQuaternion<R>, translation: Vector3<R>) -> Self {
        Self {
            scale,
            rotation,
            translation,
        }
    }

    pub fn rigid(rotation: UnitQuaternion<R>, translation: Vector3<R>) -> Self {
        Self::new(R::one(), rotation, translation)
    }

    /// Uniform scaling by `s` about `center`.
    pub fn scaling_about(s: R, center: Point3<R>) -> Self {
        Self::new(
            s,
            UnitQuaternion::identity(),
            center.coords - center.coords * s,
        )
    }

    pub fn apply_point(&self, p: &Point3<R>) -> Point3<R> {
        Point3::from(self.rotation * (p.coords * self.scale) + self.translation)
    }

    /// Rotates a direction (no scale, no translation) and re-normalizes.
    pub fn apply_normal(&self, n: &Unit<Vector3<R>>) -> Unit<Vector3<R>> {
        Unit::new_normalize(self.rotation * n.into_inner())
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.rotation * (other.translation * self.scale) + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let inv_scale = R::one() / self.scale;
        let inv_rot = self.rotation.inverse();
        Self {
            scale: inv_scale,
            rotation: inv_rot,
            translation: -(inv_rot * (self.translation * inv_scale)),
        }
    }

    pub fn apply_cloud(&self, cloud: &PointCloud<R>) -> PointCloud<R> {
        PointCloud {
            points: cloud.points.iter().map(|p| self.apply_point(p)).collect(),
            normals: cloud
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| self.apply_normal(n)).collect()),
            source_frames: cloud.source_frames.clone(),
        }
    }

    pub fn apply_mesh(&self, mesh: &TriangleMesh<R>) -> TriangleMesh<R> {
        TriangleMesh {
            vertices: mesh.vertices.iter().map(|v| self.apply_point(v)).collect(),
            triangles: mesh.triangles.clone(),
        }
    }

    /// Camera centers map like positions; rotations are left-composed with
    /// the transform rotation.
    pub fn apply_trajectory(&self, traj: &Trajectory<R>) -> Trajectory<R> {
        Trajectory {
            poses: traj
                .poses
                .iter()
                .map(|pose| crate::pose::CameraPose {
                    frame_id: pose.frame_id,
                    rotation: self.rotation * pose.rotation,
                    translation: self
                        .apply_point(&Point3::from(pose.translation))
                        .coords,
                })
                .collect(),
        }
    }
}

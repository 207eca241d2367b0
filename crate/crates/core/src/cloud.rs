//! Point cloud storage: positions with optional unit normals and per-point
//! keyframe provenance.

use nalgebra::{Point3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::Real;

/// Tolerance for accepting a stored normal as unit length.
pub const NORMAL_UNIT_TOL: f64 = 1e-6;

/// A point cloud in millimetres.
///
/// `normals` and `source_frames`, when present, run parallel to `points`.
/// `source_frames` records the keyframe that observed each point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud<R: Real> {
    pub points: Vec<Point3<R>>,
    pub normals: Option<Vec<Unit<Vector3<R>>>>,
    pub source_frames: Option<Vec<u32>>,
}

impl<R: Real> PointCloud<R> {
    pub fn from_points(points: Vec<Point3<R>>) -> Self {
        Self {
            points,
            normals: None,
            source_frames: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// Checks the structural invariants: finite coordinates, unit normals,
    /// matching companion-array lengths.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x.finite() && p.y.finite() && p.z.finite()) {
                return Err(Error::InvalidData(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != self.points.len() {
                return Err(Error::InvalidData(format!(
                    "normal count {} does not match point count {}",
                    normals.len(),
                    self.points.len()
                )));
            }
            for (i, n) in normals.iter().enumerate() {
                let norm = n.as_ref().norm().f64();
                if !norm.is_finite() || (norm - 1.0).abs() > NORMAL_UNIT_TOL {
                    return Err(Error::InvalidData(format!(
                        "normal {i} is not unit length (norm {norm})"
                    )));
                }
            }
        }
        if let Some(frames) = &self.source_frames {
            if frames.len() != self.points.len() {
                return Err(Error::InvalidData(format!(
                    "source frame count {} does not match point count {}",
                    frames.len(),
                    self.points.len()
                )));
            }
        }
        Ok(())
    }

    /// Keeps exactly the points whose index passes `keep`, preserving order
    /// and companion arrays.
    pub fn retain_indices(&self, keep: &[usize]) -> Self {
        Self {
            points: keep.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| keep.iter().map(|&i| ns[i]).collect()),
            source_frames: self
                .source_frames
                .as_ref()
                .map(|fs| keep.iter().map(|&i| fs[i]).collect()),
        }
    }

    pub fn centroid(&self) -> Option<Point3<R>> {
        if self.points.is_empty() {
            return None;
        }
        let mut sum = Vector3::zeros();
        for p in &self.points {
            sum += p.coords;
        }
        Some(Point3::from(sum / R::of_usize(self.points.len())))
    }
}

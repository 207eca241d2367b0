//! Camera poses, trajectories and pinhole intrinsics.
//!
//! Quaternions follow the Hamilton convention, stored `(qx, qy, qz, qw)` in
//! file formats, and rotate camera coordinates into world coordinates. The
//! translation is the camera center in world coordinates (mm). Camera space
//! is x-right, y-down, z-forward.

use nalgebra::{Point3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::Real;

/// Tolerance for accepting a stored quaternion as unit length.
pub const QUAT_UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose<R: Real> {
    pub frame_id: u32,
    /// Camera-to-world rotation.
    pub rotation: UnitQuaternion<R>,
    /// Camera center in world coordinates (mm).
    pub translation: Vector3<R>,
}

impl<R: Real> CameraPose<R> {
    pub fn new(frame_id: u32, rotation: UnitQuaternion<R>, translation: Vector3<R>) -> Self {
        Self {
            frame_id,
            rotation,
            translation,
        }
    }

    pub fn center(&self) -> Point3<R> {
        Point3::from(self.translation)
    }

    /// Camera forward axis (+z of camera space) in world coordinates.
    pub fn forward(&self) -> Vector3<R> {
        self.rotation * Vector3::z()
    }

    /// Maps a world-space point into camera space.
    pub fn world_to_camera(&self, p: &Point3<R>) -> Point3<R> {
        Point3::from(self.rotation.inverse() * (p.coords - self.translation))
    }

    /// Maps a camera-space point into world space.
    pub fn camera_to_world(&self, p: &Point3<R>) -> Point3<R> {
        Point3::from(self.rotation * p.coords + self.translation)
    }
}

/// An ordered camera trajectory with strictly increasing frame ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory<R: Real> {
    pub poses: Vec<CameraPose<R>>,
}

impl<R: Real> Trajectory<R> {
    pub fn new(poses: Vec<CameraPose<R>>) -> Result<Self> {
        let t = Self { poses };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.poses.windows(2) {
            if w[1].frame_id <= w[0].frame_id {
                return Err(Error::InvalidData(format!(
                    "frame ids not strictly increasing: {} then {}",
                    w[0].frame_id, w[1].frame_id
                )));
            }
        }
        for p in &self.poses {
            let norm = p.rotation.as_ref().norm().f64();
            if (norm - 1.0).abs() > QUAT_UNIT_TOL {
                return Err(Error::InvalidData(format!(
                    "pose {} quaternion is not unit length (norm {norm})",
                    p.frame_id
                )));
            }
            if !(p.translation.x.finite() && p.translation.y.finite() && p.translation.z.finite()) {
                return Err(Error::InvalidData(format!(
                    "pose {} has a non-finite translation",
                    p.frame_id
                )));
            }
        }
        Ok(())
    }

    pub fn pose_by_frame(&self, frame_id: u32) -> Option<&CameraPose<R>> {
        self.poses
            .binary_search_by_key(&frame_id, |p| p.frame_id)
            .ok()
            .map(|i| &self.poses[i])
    }

    /// Pose whose camera center is nearest to `p`; ties broken by lower frame id.
    pub fn nearest_pose(&self, p: &Point3<R>) -> Option<&CameraPose<R>> {
        self.poses
            .iter()
            .map(|pose| ((pose.center() - p).norm_squared(), pose))
            .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"))
            .map(|(_, pose)| pose)
    }
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics<R: Real> {
    pub fx: R,
    pub fy: R,
    pub cx: R,
    pub cy: R,
    pub width: u32,
    pub height: u32,
}

impl<R: Real> CameraIntrinsics<R> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > R::zero()
            && self.fy > R::zero()
            && self.cx > R::zero()
            && self.cx < R::of_usize(self.width as usize)
            && self.cy > R::zero()
            && self.cy < R::of_usize(self.height as usize);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidData(
                "intrinsics violate fx,fy > 0 and 0 < cx < width, 0 < cy < height".into(),
            ))
        }
    }

    /// Direction in camera space of the ray through pixel coordinate (u, v).
    /// Not normalized; z component is 1.
    pub fn pixel_ray(&self, u: R, v: R) -> Vector3<R> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, R::one())
    }

    /// Projects a camera-space point; returns (u, v, depth z). `None` if the
    /// point is at or behind the camera plane.
    pub fn project(&self, p: &Point3<R>) -> Option<(R, R, R)> {
        if p.z <= R::zero() {
            return None;
        }
        Some((
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
            p.z,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_rejects_non_increasing_frames() {
        let pose = |f| CameraPose::new(f, UnitQuaternion::<f64>::identity(), Vector3::zeros());
        assert!(Trajectory::new(vec![pose(3), pose(3)]).is_err());
        assert!(Trajectory::new(vec![pose(1), pose(5), pose(9)]).is_ok());
    }

    #[test]
    fn project_round_trips_pixel_ray() {
        let intr = CameraIntrinsics {
            fx: 500.0f64,
            fy: 480.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        };
        intr.validate().unwrap();
        let ray = intr.pixel_ray(100.5, 413.25);
        let (u, v, z) = intr.project(&Point3::from(ray * 37.0)).unwrap();
        assert!((u - 100.5).abs() < 1e-9);
        assert!((v - 413.25).abs() < 1e-9);
        assert!((z - 37.0).abs() < 1e-9);
    }
}

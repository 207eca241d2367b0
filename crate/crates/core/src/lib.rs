//! Surface reconstruction and evaluation for sparse, noisy point clouds of the
//! kind produced by monocular SLAM on endoscopic scenes.
//!
//! The library is organized as a pipeline plus an evaluation harness:
//!
//! * [`filters`] -- radius outlier removal and voxel-grid resampling,
//! * [`mls`] -- normal estimation and moving-least-squares projection,
//! * [`poisson`] -- indicator-function solve on a regular grid and
//!   marching-cubes isosurface extraction,
//! * [`eval`] -- ICP, surface RMSD, trajectory alignment and depth rendering
//!   against ground truth,
//! * [`synth`] -- deterministic synthetic scenes (meshes, orbit trajectories
//!   and SLAM-like corrupted observations) used as test beds,
//! * [`pipeline`] -- the staged composition used by the CLI.
//!
//! All geometry is generic over the scalar type through [`Real`]; concrete
//! `f32`/`f64` aliases for the domain types live at the crate root. Units are
//! millimetres throughout.

pub mod aabb;
pub mod cloud;
pub mod error;
pub mod eval;
pub mod filters;
pub mod io;
pub mod kdtree;
pub mod mesh;
pub mod meshquery;
pub mod mls;
pub mod pipeline;
pub mod poisson;
pub mod pose;
pub mod synth;
pub mod transform;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub use aabb::Aabb;
pub use cloud::PointCloud;
pub use error::{Error, Result};
pub use kdtree::SpatialIndex;
pub use mesh::TriangleMesh;
pub use pose::{CameraIntrinsics, CameraPose, Trajectory};
pub use transform::SimilarityTransform;

/// Scalar type used by every geometric algorithm in this crate.
///
/// Implemented for `f32` and `f64`. The helper conversions route through
/// `f64` so numeric literals in algorithm code stay readable.
pub trait Real: RealField + Copy + Default + FromPrimitive + ToPrimitive {
    #[inline]
    fn of_f64(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable in scalar type")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize not representable in scalar type")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar not convertible to f64")
    }

    #[inline]
    fn finite(self) -> bool {
        self.f64().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type PointCloud32 = PointCloud<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type TriangleMesh32 = TriangleMesh<f32>;
pub type TriangleMesh64 = TriangleMesh<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type CameraPose64 = CameraPose<f64>;
pub type CameraIntrinsics64 = CameraIntrinsics<f64>;
pub type SimilarityTransform64 = SimilarityTransform<f64>;

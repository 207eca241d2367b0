//! Evaluation of reconstructed surfaces and trajectories against ground
//! truth: ICP alignment, grid-sampled surface RMSD, signed-distance reports,
//! similarity trajectory alignment, and depth-map rendering.

pub mod depth;
pub mod icp;
pub mod surface;
pub mod trajectory;

pub use depth::{rasterize_depth, DepthMap};
pub use icp::{icp_align, IcpParams, IcpResult};
pub use surface::{distance_report, surface_rmsd, DistanceReport, HeightGrid, RmsdOutcome};
pub use trajectory::{align_trajectories, associate, trajectory_rmse, AlignmentStats};

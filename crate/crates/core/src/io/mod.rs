//! File formats: ASCII PLY for clouds and meshes, CSV for trajectories,
//! 16-bit PGM (plus raw f32 sidecar) for depth maps.

pub mod pgm;
pub mod ply;
pub mod traj_csv;

pub use pgm::{write_depth_f32, write_depth_pgm16};
pub use ply::{read_point_cloud, read_triangle_mesh, write_point_cloud, write_triangle_mesh};
pub use traj_csv::{read_trajectory, write_trajectory};

pub mod depth;
pub mod eval_surf;
pub mod eval_traj;
pub mod filter;
pub mod mls;
pub mod pipeline;
pub mod poisson;
pub mod reproduce;
pub mod synth;

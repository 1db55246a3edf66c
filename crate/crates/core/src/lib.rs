//! Footstep and gait planning for a six-legged robot walking over sparse
//! discrete footholds.
//!
//! The crate contains the stability geometry, the robot model, terrain
//! generation, a rule-based free fault-tolerant gait planner with tripod and
//! wave baselines, and three tree-search planners built on top of it.

pub mod bench;
pub mod config;
pub mod expert;
pub mod geometry;
pub mod mcts;
pub mod model;
pub mod plan;
pub mod terrain;

//! Multi-head deterministic policy gradients with dynamic priority weights.
//!
//! * [`nn`]: dense networks, Adam, checkpoints.
//! * [`replay`]: replay buffer and frame stacking.
//! * [`agent`]: DDPG, MHDDPG and HDPG.
//! * [`envs`]: environments with vector rewards.

pub mod agent;
pub mod envs;
pub mod nn;
pub mod replay;
pub mod seed;

//! Training loop, push-recovery benchmark, seed comparison and plot data for
//! the agents in `hdpg-core`, plus the `hdpg` command-line tool.

pub mod compare;
pub mod config;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod plot;
pub mod train;

pub use config::{EnvKind, EvalConfig, RunConfig};
pub use error::HarnessError;

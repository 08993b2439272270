//! Reproducible parallel execution, statistics and parameter sweeps.

pub(crate) mod exec;
mod stats;
mod streams;
mod sweep;

pub use exec::{simulate_range, Workers, CHUNK_TRAJECTORIES};
pub use stats::{Interval, StatSummary, Z_95};
pub use streams::StreamKey;
pub use sweep::{run_sweep, CellOutcome, SweepRow, SweepSpec};

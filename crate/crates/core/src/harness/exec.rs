use std::ops::Range;

use rayon::prelude::*;

use super::StreamKey;
use crate::experiment::{DeviceConfig, EnsembleResult, Pipeline};
use crate::{Error, Result};

/// Trajectories per work item.
pub const CHUNK_TRAJECTORIES: u64 = 1 << 13;

/// Thread pool used for an ensemble.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Workers {
    /// The global rayon pool.
    #[default]
    Global,
    /// A dedicated pool with this many threads.
    Fixed(usize),
}

impl Workers {
    pub fn install<T: Send>(self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self {
            Workers::Global => Ok(job()),
            Workers::Fixed(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Simulates trajectories `range` of the cell keyed by `key`.
pub fn simulate_range(config: &DeviceConfig, key: &StreamKey, range: Range<u64>) -> Result<EnsembleResult> {
    let pipeline = Pipeline::new(config)?;
    simulate_with(&pipeline, EnsembleResult::for_config(config), key, range)
}

fn simulate_with(
    pipeline: &Pipeline,
    mut acc: EnsembleResult,
    key: &StreamKey,
    range: Range<u64>,
) -> Result<EnsembleResult> {
    for index in range {
        let mut rng = key.stream(index);
        let (walk, outcome) = pipeline.simulate(&mut rng)?;
        acc.record(&walk, &outcome);
    }
    Ok(acc)
}

pub(crate) fn run_cell(
    config: &DeviceConfig,
    seed: u64,
    cell: u64,
    trajectories: u64,
    workers: Workers,
) -> Result<EnsembleResult> {
    let pipeline = Pipeline::new(config)?;
    let key = StreamKey::new(seed, cell);
    let empty = EnsembleResult::for_config(config);
    let chunks = trajectories.div_ceil(CHUNK_TRAJECTORIES);
    workers.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK_TRAJECTORIES;
                let end = (start + CHUNK_TRAJECTORIES).min(trajectories);
                simulate_with(&pipeline, empty.clone(), &key, start..end)
            })
            .try_reduce(|| empty.clone(), |a, b| a.merge(&b))
    })?
}

//! Per-trajectory random streams.
//!
//! Every trajectory gets its own ChaCha8 stream. The 256-bit key is the base
//! seed and the sweep cell index laid out verbatim; the trajectory index is the
//! ChaCha stream id. Any trajectory can therefore be regenerated on its own,
//! and the draws do not depend on how trajectories are spread over workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    key: [u8; 32],
}

impl StreamKey {
    pub fn new(base_seed: u64, cell: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&base_seed.to_le_bytes());
        key[8..16].copy_from_slice(&cell.to_le_bytes());
        key[16..].copy_from_slice(b"sgsim/trajectory");
        StreamKey { key }
    }

    /// The generator for trajectory `index`, positioned at its first word.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}

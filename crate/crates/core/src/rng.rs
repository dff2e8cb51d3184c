//! Counter-based random streams keyed by `(seed, trial, vertex, purpose)`.
//!
//! Every random quantity attached to a vertex comes from its own ChaCha8
//! stream, so a realization does not depend on the order in which vertices
//! are explored or on how trials are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tree::{splitmix64, PathKey, VertexId};

/// What a stream is used for. Separate purposes never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Mean-one exponential holding time `T_v`.
    Holding = 1,
    /// Chain state `X_v` given the parent state.
    State = 2,
    /// Offspring count of `v` on a random tree.
    Offspring = 3,
    /// Joint draw of all children's states from the parent.
    Siblings = 4,
    /// Generic per-trial stream (single chain paths, initial draws).
    Trial = 5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub trial: u64,
}

impl StreamKey {
    pub fn new(seed: u64, trial: u64) -> Self {
        StreamKey { seed, trial }
    }

    pub fn stream(&self, key: PathKey, purpose: Purpose) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&splitmix64(self.trial ^ 0x5851_f42d_4c95_7f2d).to_le_bytes());
        bytes[16..24].copy_from_slice(&key.hi.to_le_bytes());
        bytes[24..].copy_from_slice(&key.lo.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(purpose as u64);
        rng
    }

    pub fn vertex_stream(&self, v: &VertexId, purpose: Purpose) -> ChaCha8Rng {
        self.stream(v.key(), purpose)
    }

    pub fn trial_stream(&self) -> ChaCha8Rng {
        self.stream(PathKey::ROOT, Purpose::Trial)
    }
}

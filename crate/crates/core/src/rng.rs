//! Counter-based random streams keyed by `(master seed, replication, particle)`.
//!
//! Every sampler in the crate draws from a stream derived here, never from a
//! shared generator. Two runs that agree on the lineage see bit-identical
//! randomness regardless of thread schedule, which is what lets a truncated
//! system and its untruncated twin be driven by the same noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator every stream resolves to.
pub type StreamRng = ChaCha8Rng;

/// Independent sub-streams within one lineage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    InitialCondition = 1,
    BigJumps = 2,
    SmallJumps = 3,
    Auxiliary = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master: u64,
    pub particle: u64,
    pub replication: u64,
}

impl SeedLineage {
    pub fn new(master: u64, particle: u64, replication: u64) -> Self {
        Self {
            master,
            particle,
            replication,
        }
    }

    pub fn stream(&self, purpose: Purpose) -> StreamRng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&self.replication.to_le_bytes());
        seed[16..24].copy_from_slice(&self.particle.to_le_bytes());
        seed[24..32].copy_from_slice(b"lvymckv1");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(purpose as u64);
        rng
    }

    /// Same master seed, another particle slot.
    pub fn with_particle(&self, particle: u64) -> Self {
        Self { particle, ..*self }
    }

    pub fn with_replication(&self, replication: u64) -> Self {
        Self {
            replication,
            ..*self
        }
    }
}

/// Replication indices at or above this value are reserved for auxiliary
/// ensembles (reference clouds, Picard iterates) so they never collide with
/// experiment replications.
pub const RESERVED_REPLICATIONS: u64 = 1 << 48;

/// Reserved replication index for auxiliary ensemble `slot`.
pub fn reserved_replication(slot: u64) -> u64 {
    RESERVED_REPLICATIONS + slot
}

//! Seeded random streams.
//!
//! A single master seed is split into purpose-specific streams by fixed
//! offsets so that changing, say, the swarm size does not perturb the
//! feasible-point sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CmcRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Functionals = 1,
    Directions = 2,
    Positions = 3,
    QInit = 4,
    Optimizer = 5,
    Simulator = 6,
}

impl Stream {
    pub fn seed(self, master: u64) -> u64 {
        master.wrapping_add(self as u64)
    }

    pub fn rng(self, master: u64) -> CmcRng {
        CmcRng::seed_from_u64(self.seed(master))
    }
}

/// Independent sub-stream `index` of `seed`, used to give each particle or
/// replication its own generator.
pub fn substream(seed: u64, index: u64) -> CmcRng {
    let mut rng = CmcRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

//! Seeded random streams.
//!
//! Every experiment seed fans out into independent ChaCha8 streams, one per
//! consumer, so that changing how often one consumer draws never perturbs
//! another. Stream ids are fixed:
//!
//! | id | consumer                                   |
//! |----|--------------------------------------------|
//! | 0  | world geometry (reset, user motion)        |
//! | 1  | channel realizations                       |
//! | 2  | network initialization                     |
//! | 3  | action sampling                            |
//! | 4  | value-regression minibatch shuffling       |
//! | 5  | heuristic-baseline channel draws           |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Offset between consecutive per-seed base seeds derived from a master seed.
pub const SEED_STRIDE: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamId {
    Geometry = 0,
    Channel = 1,
    Init = 2,
    Actions = 3,
    Shuffle = 4,
    Heuristic = 5,
}

pub fn stream(seed: u64, id: StreamId) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// Base seed of the `index`-th run of a sweep started from `master`.
pub fn sweep_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(SEED_STRIDE.wrapping_mul(index as u64))
}

/// All streams owned by one training run.
#[derive(Debug, Clone)]
pub struct SeedStreams {
    pub seed: u64,
    pub geometry: SimRng,
    pub channel: SimRng,
    pub init: SimRng,
    pub actions: SimRng,
    pub shuffle: SimRng,
    pub heuristic: SimRng,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            geometry: stream(seed, StreamId::Geometry),
            channel: stream(seed, StreamId::Channel),
            init: stream(seed, StreamId::Init),
            actions: stream(seed, StreamId::Actions),
            shuffle: stream(seed, StreamId::Shuffle),
            heuristic: stream(seed, StreamId::Heuristic),
        }
    }
}

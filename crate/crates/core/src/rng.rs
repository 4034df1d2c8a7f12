//! Seeded generators and per-trial substreams.
//!
//! Substream `i` of master seed `s` is ChaCha8 seeded from `s` with stream
//! number `i`, so trial results never depend on which thread ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x005E_ED0F_DE3A_2025;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

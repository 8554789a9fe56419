//! Seeded random streams.
//!
//! Every consumer of randomness draws from a named substream of the run
//! seed, so adding draws to one component never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Substream names used across the crate.
pub mod stream {
    pub const DATASET: &str = "dataset";
    pub const SPLIT: &str = "split";
    pub const KMEANS: &str = "kmeans";
    pub const SIMPLEX: &str = "simplex";
    pub const LEARNER: &str = "learner";
    pub const SELECTION: &str = "selection";
    pub const INITIAL: &str = "initial";
    pub const BANDWIDTH: &str = "bandwidth";
}

/// FNV-1a, used only to turn a stream name into a ChaCha stream id.
fn name_hash(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Returns the generator for `name` under `seed`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(name_hash(name));
    rng
}

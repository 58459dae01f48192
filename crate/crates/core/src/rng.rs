//! Seeded, splittable random streams.
//!
//! Every replicate, method, subsample size and retry attempt gets its own
//! ChaCha stream derived from the master seed and a label path, so results
//! do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type CoxRng = ChaCha8Rng;

/// Label namespaces used when deriving substreams.
pub mod label {
    pub const COHORT: u64 = 0x11;
    pub const PILOT: u64 = 0x22;
    pub const DRAW: u64 = 0x33;
    pub const CALIBRATION: u64 = 0x44;
    pub const REPLICATE: u64 = 0x55;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Hash a label path into a 64-bit stream id.
pub fn stream_id(labels: &[u64]) -> u64 {
    labels.iter().fold(0x6A09_E667_F3BC_C908, |acc, &l| {
        splitmix64(acc ^ splitmix64(l))
    })
}

/// Generator for `labels` under `master`.
pub fn substream(master: u64, labels: &[u64]) -> CoxRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(labels));
    rng
}

/// Derive a fresh child generator from a parent; advances the parent.
pub fn split(parent: &mut CoxRng, labels: &[u64]) -> CoxRng {
    use rand::Rng;
    let seed: u64 = parent.random();
    substream(seed, labels)
}

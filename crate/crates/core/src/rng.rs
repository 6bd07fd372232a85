//! Named, seeded random substreams.
//!
//! Each experiment seed fans out into independent streams (environment draws,
//! acquisition Monte Carlo, decision-maker responses, candidate generation) so
//! that changing the sample count in one consumer never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream derived from a master seed and a stream name.
pub fn substream(master: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master ^ fnv1a(name)))
}

/// Stream additionally keyed by an index (iteration number, candidate id).
pub fn substream_indexed(master: u64, name: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, name, index))
}

/// Raw derived seed for components that take a `u64` seed directly.
pub fn derive_seed(master: u64, name: &str, index: u64) -> u64 {
    let base = splitmix64(master ^ fnv1a(name));
    splitmix64(base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

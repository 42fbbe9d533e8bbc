//! Per-record random streams.
//!
//! Every consumer of randomness gets a ChaCha8 generator keyed by
//! `(seed, domain, index)`, so results never depend on evaluation order or
//! worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates independent uses of the same `(seed, index)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Grounding = 0x6772_6f75_6e64,
    SemanticNoise = 0x7365_6d61_6e74,
    GroundingNoise = 0x6772_6e6f_6973,
    Synthesis = 0x7379_6e74_6800,
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ mix(domain as u64)));
    rng.set_stream(index);
    rng
}

/// Two-level stream, e.g. one per object inside one record.
pub fn substream(seed: u64, domain: Domain, index: u64, sub: u64) -> ChaCha8Rng {
    stream(mix(seed ^ mix(index)), domain, sub)
}

//! Seeded randomness.
//!
//! Every stochastic routine takes an explicit 64-bit seed and draws from
//! xoshiro256** whose 256-bit state is expanded from the seed with
//! SplitMix64 (`Xoshiro256StarStar::seed_from_u64`). Derived streams use
//! [`substream`], which mixes a tag into the seed through one SplitMix64
//! step so that sibling streams never share state.

use rand::SeedableRng;
pub use rand_xoshiro::Xoshiro256StarStar as Rng;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// One SplitMix64 output for `seed ^ tag`-style stream splitting.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream(seed: u64, tag: u64) -> Rng {
    seeded(splitmix64(seed ^ splitmix64(tag)))
}

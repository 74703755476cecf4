//! Seeded random streams.
//!
//! Each run seeds a ChaCha8 generator from a 64-bit seed and selects an independent
//! stream per purpose, so changing how often one purpose draws leaves the others intact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose-specific stream identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Arrival = 1,
    Service = 2,
    Noise = 3,
    Input = 4,
    /// Codebook and message draws in the coding harness.
    Coding = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer over `seed + index * golden`, for per-trial seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

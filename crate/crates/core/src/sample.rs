//! Seeded, platform-independent shuffling.
//!
//! The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! whose output stream is fixed by the `rand_chacha` crate independently of
//! pointer width or endianness. Index draws use rejection sampling on full
//! 64-bit words, so a permutation depends only on the seed and the length.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Uniform integer in `0..bound` by rejection. `bound` must be non-zero.
pub fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    // 2^64 mod bound; draws at or above 2^64 - rem would bias the result.
    let rem = (u64::MAX % bound + 1) % bound;
    let limit = u64::MAX - rem;
    loop {
        let x = rng.next_u64();
        if rem == 0 || x <= limit {
            return x % bound;
        }
    }
}

/// Fisher-Yates shuffle, walking from the last element down.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// Shuffles `items` with `seed` and keeps the first `size` of them.
pub fn sample_prefix<T>(mut items: alloc::vec::Vec<T>, size: usize, seed: u64) -> alloc::vec::Vec<T> {
    shuffle(&mut items, seed);
    items.truncate(size);
    items
}

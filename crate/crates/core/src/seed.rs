//! Child-seed derivation.
//!
//! Every stochastic operation takes a 64-bit seed; nested operations derive
//! child seeds with [`child_seed`] instead of sharing RNG state. The mixing
//! rule is fixed (SplitMix64 finalizer over `master + (index+1)*GOLDEN`), so
//! adding more streams never perturbs existing ones and results do not
//! depend on thread count or evaluation order.

/// 2^64 / phi, the Weyl increment used by SplitMix64.
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stream `index` of operation seeded by `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

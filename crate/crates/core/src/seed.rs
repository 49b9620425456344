//! Per-clip seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded with
//! `seed_from_u64`; normal variates use `rand_distr::Normal` (ziggurat).

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master + (index + 1)·γ`.
///
/// Consecutive indices land on well separated, avalanche-mixed seeds, so
/// clip `k` depends only on `(master, k)` and never on generation order.
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

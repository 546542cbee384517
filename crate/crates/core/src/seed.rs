//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit is keyed by the top-level seed plus a
//! path of integers (structure, member, component, day, attempt, ...). Each
//! step folds one path element in with a SplitMix64 finalizer, so streams for
//! different paths are decorrelated and independent of execution order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream identified by `path` under `base`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(base.wrapping_add(GOLDEN)), |acc, &p| mix(acc ^ mix(p.wrapping_add(GOLDEN))))
}

//! Small shared helpers.

/// Derive an independent seed from a base seed and a salt, so that
/// sub-computations (trials, pipeline stages) get decorrelated RNG
/// streams while staying reproducible from the base seed.
pub(crate) fn derive_seed(base: u64, salt: u64) -> u64 {
    // splitmix64: advance by the salted golden-ratio increment, then mix.
    let mut x = base.wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9e3779b97f4a7c15));
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

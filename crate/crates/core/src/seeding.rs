//! Stable seed derivation. Hand-rolled splitmix64 so derived seeds never
//! depend on std's hasher, which is not guaranteed stable across releases.

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a salt.
pub(crate) fn derive(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// Folds a feature-index set (order-insensitively) into a seed.
pub(crate) fn subset_seed(seed: u64, indices: &[usize]) -> u64 {
    let mut sorted: Vec<usize> = indices.to_vec();
    sorted.sort_unstable();
    let mut acc = splitmix64(seed);
    for i in sorted {
        acc = splitmix64(acc ^ (i as u64).wrapping_add(1));
    }
    acc
}

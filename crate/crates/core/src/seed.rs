//! Stable seed derivation.
//!
//! All randomness in the crate flows from a single base seed. Sub-seeds are
//! derived with a fixed mixing function so results do not depend on library
//! hashers or platform details.

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a textual tag.
pub fn derive(base: u64, tag: &str) -> u64 {
    let mut h = mix(base);
    for b in tag.as_bytes() {
        h = mix(h ^ u64::from(*b));
    }
    h
}

/// Derive the i-th sub-seed from a base seed (per-tree, per-fold, ...).
pub fn derive_indexed(base: u64, index: u64) -> u64 {
    mix(mix(base) ^ mix(index))
}

//! Stable per-network seeds.
//!
//! A network's seed is a SplitMix64 chain over `(base seed, method name,
//! segment or band index, part)`. The chain only uses integer arithmetic, so
//! seeds are identical on every platform and independent of scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    splitmix64(state ^ word)
}

/// Seed for network `(method, index, part)` of a run with base seed `base`.
/// `part` is 0 for the real part and 1 for the imaginary part.
pub fn derive_seed(base: u64, method: &str, index: usize, part: u8) -> u64 {
    let mut h = splitmix64(base);
    for chunk in method.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = absorb(h, u64::from_le_bytes(word));
    }
    h = absorb(h, method.len() as u64);
    h = absorb(h, index as u64);
    absorb(h, part as u64)
}

/// Splits one network seed into independent initialization and batch-sampling seeds.
pub fn split(seed: u64) -> (u64, u64) {
    (splitmix64(seed), splitmix64(seed ^ GOLDEN.rotate_left(17)))
}

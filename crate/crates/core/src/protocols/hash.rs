use crate::rng::mix64;

const CATEGORY_KEY: u64 = 0xC2B2_AE3D_27D4_EB4F;

/// Seeded hash of a 0-based category into `0..g`.
///
/// The seed travels inside each report, so the server can recompute the
/// preimage of any reported value.
#[inline]
pub fn lh_hash(seed: u64, x: usize, g: usize) -> usize {
    let h = mix64(seed ^ mix64((x as u64).wrapping_add(1).wrapping_mul(CATEGORY_KEY)));
    (h % g as u64) as usize
}

/// All categories in `0..k` whose hash under `seed` equals `value`.
pub fn lh_preimage(seed: u64, value: usize, k: usize, g: usize) -> Vec<usize> {
    (0..k).filter(|&x| lh_hash(seed, x, g) == value).collect()
}

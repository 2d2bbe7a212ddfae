//! Deterministic per-(run, user) random streams.
//!
//! Every stream is a SplitMix64 sequence whose starting state is derived from
//! `(master_seed, run, user)` through the SplitMix64 finalizer. Each
//! derivation step is a bijection in the value being folded in, so for a
//! fixed `(master_seed, run)` distinct users always start from distinct
//! states, regardless of the order in which streams are created.

use rand::rand_core::impls;
use rand::RngCore;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const RUN_KEY: u64 = 0xD1B5_4A32_D192_ED03;
const USER_KEY: u64 = 0xAEF1_7502_108E_F2D9;

/// SplitMix64 finalizer (Steele, Lea and Flood).
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Single-owner random stream. Not `Clone`: parallel code derives one stream
/// per unit of work instead of sharing.
#[derive(Debug)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn from_state(state: u64) -> Self {
        Self { state }
    }

    /// Starting state is `mix(mix(mix(seed + γ) ⊕ run·K₁) ⊕ user·K₂)`.
    pub fn derive(master_seed: u64, run: u64, user: u64) -> Self {
        let s = mix64(master_seed.wrapping_add(GOLDEN_GAMMA));
        let s = mix64(s ^ run.wrapping_mul(RUN_KEY));
        Self::from_state(mix64(s ^ user.wrapping_mul(USER_KEY)))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `true` with probability `prob` (clamped to [0, 1]).
    #[inline]
    pub fn bernoulli(&mut self, prob: f64) -> bool {
        self.unit() < prob
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's nearly-divisionless method.
        let n = n as u64;
        let mut m = (self.next_u64() as u128) * (n as u128);
        if (m as u64) < n {
            let threshold = n.wrapping_neg() % n;
            while (m as u64) < threshold {
                m = (self.next_u64() as u128) * (n as u128);
            }
        }
        (m >> 64) as usize
    }
}

/// Free-function form of [`RngStream::derive`].
pub fn derive_stream(master_seed: u64, run: u64, user: u64) -> RngStream {
    RngStream::derive(master_seed, run, user)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

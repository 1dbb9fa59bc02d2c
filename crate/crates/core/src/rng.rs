//! Keyed SplitMix64 streams.
//!
//! Every stochastic draw in the pipeline is taken from a stream derived from
//! `(seed, segment_index, purpose_tag)`, so changing how one purpose consumes
//! randomness never perturbs another.

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;
const MAX_TAG_LEN: usize = 32;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes, then folded with the segment index and mixed.
pub fn hash64(segment_index: u64, tag: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in tag.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(h ^ segment_index.wrapping_mul(GOLDEN))
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    segment_index: u64,
    tag: String,
    state: u64,
    counter: u64,
}

/// Derives the stream for `(seed, segment_index, purpose_tag)`.
pub fn derive_rng(seed: u64, segment_index: u64, purpose_tag: &str) -> Result<RngStream> {
    if purpose_tag.is_empty() {
        return Err(Error::invalid("rng purpose tag must be nonempty"));
    }
    if purpose_tag.len() > MAX_TAG_LEN {
        return Err(Error::invalid(format!(
            "rng purpose tag longer than {MAX_TAG_LEN} bytes: {purpose_tag:?}"
        )));
    }
    Ok(RngStream {
        seed,
        segment_index,
        tag: purpose_tag.to_owned(),
        state: seed ^ hash64(segment_index, purpose_tag),
        counter: 0,
    })
}

impl RngStream {
    /// A stream starting at a raw SplitMix64 state, bypassing key derivation.
    pub fn from_raw_state(state: u64) -> Self {
        RngStream {
            seed: state,
            segment_index: 0,
            tag: String::from("raw"),
            state,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn segment_index(&self) -> u64 {
        self.segment_index
    }

    pub fn purpose_tag(&self) -> &str {
        &self.tag
    }

    /// Number of 64-bit words drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        self.counter += 1;
        mix64(self.state)
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box–Muller on two consecutive uniforms (cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

//! Counter-based bond randomness.
//!
//! Every bond of `Z^d` carries a uniform variate that is a pure function of
//! `(seed, sample_id, bond)`, so explorations can reveal bonds lazily and in
//! any order, and reruns at different `p` see the same uniforms.

use crate::lattice::BondKey;

const BOND_DOMAIN: u64 = 0x6a09_e667_f3bc_c908;
const AUX_DOMAIN: u64 = 0xbb67_ae85_84ca_a73b;
const SEED_SALT: u64 = 0x3c6e_f372_fe94_f82b;
const SAMPLE_SALT: u64 = 0xa54f_f53a_5f1d_36f1;

/// Tags for auxiliary (non-bond) variates.
pub mod tags {
    pub const POINT: u64 = 1;
    pub const ER_JUMP: u64 = 2;
    pub const ER_PAIR: u64 = 3;
}

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
fn to_unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A replicate's source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    sample_id: u64,
    key: u64,
}

/// Streaming keyed hash over a little-endian byte encoding made of 32-bit lanes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LaneHasher {
    h: u64,
    pending: Option<u32>,
    bytes: u64,
}

impl LaneHasher {
    #[inline(always)]
    fn new(key: u64, domain: u64) -> Self {
        LaneHasher {
            h: mix64(key ^ domain),
            pending: None,
            bytes: 0,
        }
    }

    #[inline(always)]
    fn absorb(&mut self, w: u64) {
        self.h = mix64(self.h ^ w);
    }

    #[inline(always)]
    pub(crate) fn push_u32(&mut self, x: u32) {
        self.bytes += 4;
        match self.pending.take() {
            None => self.pending = Some(x),
            Some(lo) => self.absorb(lo as u64 | (x as u64) << 32),
        }
    }

    #[inline(always)]
    pub(crate) fn push_coords(&mut self, c: &[i32]) {
        for &v in c {
            self.push_u32(v as u32);
        }
    }

    #[inline(always)]
    fn push_u64(&mut self, x: u64) {
        self.push_u32(x as u32);
        self.push_u32((x >> 32) as u32);
    }

    #[inline(always)]
    pub(crate) fn finish(mut self) -> u64 {
        if let Some(lo) = self.pending.take() {
            self.absorb(lo as u64);
        }
        mix64(self.h ^ self.bytes.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    #[inline(always)]
    pub(crate) fn finish_unit(self) -> f64 {
        to_unit(self.finish())
    }
}

impl RandomStream {
    pub fn new(seed: u64, sample_id: u64) -> Self {
        let key = mix64(mix64(seed ^ SEED_SALT) ^ mix64(sample_id ^ SAMPLE_SALT));
        RandomStream {
            seed,
            sample_id,
            key,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_id(&self) -> u64 {
        self.sample_id
    }

    /// Hash state after absorbing the dimension and the lower endpoint.
    #[inline]
    pub(crate) fn bond_prefix(&self, lo: &[i32]) -> LaneHasher {
        let mut h = LaneHasher::new(self.key, BOND_DOMAIN);
        h.push_u32(lo.len() as u32);
        h.push_coords(lo);
        h
    }

    /// Uniform of the bond `{lo, hi}`; `lo` must be the lexicographically
    /// smaller endpoint.
    #[inline]
    pub(crate) fn bond_uniform_coords(&self, lo: &[i32], hi: &[i32]) -> f64 {
        let mut h = self.bond_prefix(lo);
        h.push_coords(hi);
        h.finish_unit()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution attached to `b`.
    pub fn bond_uniform(&self, b: &BondKey) -> f64 {
        self.bond_uniform_coords(b.lo(), b.hi())
    }

    /// Occupation status of `b` at density `p`; monotone in `p`.
    pub fn is_occupied(&self, b: &BondKey, p: f64) -> bool {
        self.bond_uniform(b) < p
    }

    /// Auxiliary uniform keyed by a tag and an index tuple, independent of all
    /// bond uniforms of this stream.
    pub fn aux_uniform(&self, tag: u64, index: &[u64]) -> f64 {
        let mut h = LaneHasher::new(self.key, AUX_DOMAIN);
        h.push_u64(tag);
        for &i in index {
            h.push_u64(i);
        }
        h.finish_unit()
    }

    /// Uniform integer in `0..bound` derived from [`Self::aux_uniform`].
    pub fn aux_index(&self, tag: u64, index: &[u64], bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut h = LaneHasher::new(self.key, AUX_DOMAIN);
        h.push_u64(tag);
        for &i in index {
            h.push_u64(i);
        }
        // multiply-shift reduction; bias is below 2^-64 * bound
        ((h.finish() as u128 * bound as u128) >> 64) as u64
    }
}

//! Counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key, so
//! results do not depend on traversal order or on how work is split across
//! threads. The mixing function is the SplitMix64 finalizer:
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//! z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//! z =  z ^ (z >> 31)
//! ```
//!
//! Keys are derived as follows:
//!
//! * root of a tree: `mix64(seed ^ ROOT_SALT)`
//! * child `s` of a node with key `k`: `mix64(k + GAMMA * (s + 1))`
//! * the uniform drawn at a node with key `k`: top 53 bits of `mix64(k ^ DRAW_SALT)`
//! * sub-seed `i` of a seed: `mix64(seed ^ mix64(i + INDEX_SALT))`
//!
//! so the bits of a sampled tree depend only on `(seed, node word)`.

/// Weyl increment of SplitMix64.
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
pub const ROOT_SALT: u64 = 0x243F_6A88_85A3_08D3;
pub const DRAW_SALT: u64 = 0x1319_8A2E_0370_7344;
pub const INDEX_SALT: u64 = 0xA409_3822_299F_31D0;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn root_key(seed: u64) -> u64 {
    mix64(seed ^ ROOT_SALT)
}

#[inline]
pub fn child_key(parent: u64, symbol: u8) -> u64 {
    mix64(parent.wrapping_add(GAMMA.wrapping_mul(symbol as u64 + 1)))
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The uniform draw attached to a node key.
#[inline]
pub fn node_uniform(key: u64) -> f64 {
    unit_from_bits(mix64(key ^ DRAW_SALT))
}

/// Independent sub-seed `index` of `seed` (trials, attempts, windows).
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(INDEX_SALT)))
}

/// Sequential stream `mix64(key + GAMMA * counter)`.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(GAMMA.wrapping_mul(self.counter)))
    }

    pub fn uniform(&mut self) -> f64 {
        unit_from_bits(self.next_u64())
    }

    /// Uniform index in `0..n` (n > 0), by rejection to avoid modulo bias.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }
}

/// Lets the stream drive samplers from `rand_distr`.
impl rand_core::RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (Stream::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        Stream::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = Stream::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        let mut state = 0u64;
        let mut next = || {
            state = state.wrapping_add(GAMMA);
            mix64(state)
        };
        assert_eq!(next(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(next(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(next(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn uniforms_in_unit_interval() {
        let mut s = Stream::new(7);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn index_is_in_range_and_covers() {
        let mut s = Stream::new(3);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            seen[s.index(5)] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn child_keys_differ_by_symbol() {
        let r = root_key(1);
        assert_ne!(child_key(r, 0), child_key(r, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }
}

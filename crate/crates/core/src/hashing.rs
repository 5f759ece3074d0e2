//! Element hashing, register selection and rank extraction.
//!
//! Every element is hashed once to a 64-bit value `h`. The register index is
//! derived from `h` by Fibonacci hashing (multiply by the 64-bit golden ratio
//! constant, keep the top `log2m` bits) and the rank is `rho(h)`, the 1-based
//! position of the first one-bit reading from the most significant end.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Word size of the hash values, in bits.
pub const WORD_BITS: u32 = 64;

/// Largest rank a register can hold; registers are six bits wide.
pub const MAX_RANK: u8 = 63;

pub const MIN_LOG2M: u8 = 4;
pub const MAX_LOG2M: u8 = 18;

/// Knuth's multiplicative constant, `2^64 / phi` rounded to odd.
pub const FIBONACCI_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

/// The 64-bit hash family a sketch was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HashKind {
    /// XXH3 64-bit, seeded.
    #[default]
    Xxh3,
    /// XXH64, seeded.
    Xxh64,
}

impl HashKind {
    pub fn id(self) -> &'static str {
        match self {
            HashKind::Xxh3 => "xxh3-64",
            HashKind::Xxh64 => "xxh64",
        }
    }
}

impl fmt::Display for HashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for HashKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xxh3-64" | "xxh3" => Ok(HashKind::Xxh3),
            "xxh64" => Ok(HashKind::Xxh64),
            other => Err(Error::InvalidArgument(format!(
                "unknown hash function {other:?}"
            ))),
        }
    }
}

/// A concrete hash function: family plus seed. Sketches are only
/// mergeable when their hash functions are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HashFunction {
    pub kind: HashKind,
    pub seed: u64,
}

impl HashFunction {
    pub fn new(kind: HashKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    #[inline]
    pub fn hash_bytes(&self, bytes: &[u8]) -> u64 {
        match self.kind {
            HashKind::Xxh3 => xxhash_rust::xxh3::xxh3_64_with_seed(bytes, self.seed),
            HashKind::Xxh64 => xxhash_rust::xxh64::xxh64(bytes, self.seed),
        }
    }

    #[inline]
    pub fn hash<K: HashKey + ?Sized>(&self, key: &K) -> u64 {
        key.hash64(self)
    }
}

/// Anything that can be fed to a sketch. Integers hash their
/// little-endian bytes, so `7u64` and `7u64.to_le_bytes()` agree.
pub trait HashKey {
    fn hash64(&self, hasher: &HashFunction) -> u64;
}

impl HashKey for u64 {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(&self.to_le_bytes())
    }
}

impl HashKey for [u8] {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(self)
    }
}

impl<const N: usize> HashKey for [u8; N] {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(self)
    }
}

impl HashKey for str {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(self.as_bytes())
    }
}

impl HashKey for String {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(self.as_bytes())
    }
}

impl HashKey for Vec<u8> {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        hasher.hash_bytes(self)
    }
}

impl<K: HashKey + ?Sized> HashKey for &K {
    #[inline]
    fn hash64(&self, hasher: &HashFunction) -> u64 {
        (**self).hash64(hasher)
    }
}

/// Hash configuration shared by every sketch: hash function and index width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashConfig {
    pub function: HashFunction,
    log2m: u8,
}

impl HashConfig {
    pub fn new(log2m: u8, function: HashFunction) -> Result<Self> {
        validate_log2m(log2m)?;
        Ok(Self { function, log2m })
    }

    #[inline]
    pub fn log2m(&self) -> u8 {
        self.log2m
    }

    #[inline]
    pub fn m(&self) -> usize {
        1 << self.log2m
    }

    pub fn word_bits(&self) -> u32 {
        WORD_BITS
    }

    /// Maps an element to its `(register index, clamped rank)` pair.
    #[inline]
    pub fn pair<K: HashKey + ?Sized>(&self, key: &K) -> (usize, u8) {
        let h = self.function.hash(key);
        (register_index(h, self.log2m as u32), clamp_rank(rho(h)))
    }
}

pub(crate) fn validate_log2m(log2m: u8) -> Result<()> {
    if !(MIN_LOG2M..=MAX_LOG2M).contains(&log2m) {
        return Err(Error::InvalidArgument(format!(
            "log2m must be in {MIN_LOG2M}..={MAX_LOG2M}, got {log2m}"
        )));
    }
    Ok(())
}

/// Top `log2m` bits of `h * FIBONACCI_MULTIPLIER mod 2^64`.
#[inline]
pub fn register_index(h: u64, log2m: u32) -> usize {
    debug_assert!((1..=64).contains(&log2m));
    let p = h.wrapping_mul(FIBONACCI_MULTIPLIER);
    (p >> (64 - log2m)) as usize
}

/// Leading zeros plus one; `rho(0)` is defined as 64.
#[inline]
pub fn rho(x: u64) -> u8 {
    if x == 0 {
        64
    } else {
        x.leading_zeros() as u8 + 1
    }
}

#[inline]
pub fn clamp_rank(r: u8) -> u8 {
    r.min(MAX_RANK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn fibonacci_index() {
        assert_eq!(register_index(0, 4), 0);
        assert_eq!(register_index(0, 18), 0);
        assert_eq!(register_index(1, 4), 9);
        // 2 * c mod 2^64, computed with u128 arithmetic
        let prod = ((2u128 * FIBONACCI_MULTIPLIER as u128) % (1u128 << 64)) as u64;
        assert_eq!(prod, 0x3C6E_F372_FE94_F82A);
        assert_eq!(register_index(2, 4), 3);
        assert_eq!(
            register_index(u64::MAX, 64),
            FIBONACCI_MULTIPLIER.wrapping_neg() as usize
        );
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(1 << 63), 1);
        assert_eq!(rho(u64::MAX), 1);
        assert_eq!(rho(1 << 62), 2);
        assert_eq!(rho(1), 64);
        assert_eq!(rho(0), 64);
        assert_eq!(clamp_rank(64), 63);
        assert_eq!(clamp_rank(63), 63);
        assert_eq!(clamp_rank(1), 1);
    }

    #[test]
    fn rho_bit_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x: u64 = rng.random::<u64>() >> rng.random_range(0..64);
            if x == 0 {
                continue;
            }
            let k = rho(x) as u32;
            assert_eq!(x >> (64 - k), 1);
        }
    }

    #[test]
    fn rho_geometric_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000u32;
        let mut counts = [0u32; 65];
        for _ in 0..n {
            counts[rho(rng.random()) as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate().take(21).skip(1) {
            let p = 0.5f64.powi(k as i32);
            let mean = n as f64 * p;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sd + 1.0,
                "k={k} count={c} mean={mean}"
            );
        }
    }

    #[test]
    fn hash_deterministic_and_seeded() {
        for kind in [HashKind::Xxh3, HashKind::Xxh64] {
            let f = HashFunction::new(kind, 42);
            assert_eq!(f.hash(&12345u64), f.hash(&12345u64));
            assert_eq!(f.hash("abcdefgh"), f.hash(b"abcdefgh"));
            assert_eq!(f.hash(&7u64), f.hash(&7u64.to_le_bytes()));
            assert_ne!(f.hash(&1u64), HashFunction::new(kind, 43).hash(&1u64));
        }
    }

    #[test]
    fn no_collisions_in_sample() {
        let f = HashFunction::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let keys: HashSet<u64> = (0..100_000).map(|_| rng.random()).collect();
        let hashes: HashSet<u64> = keys.iter().map(|k| f.hash(k)).collect();
        assert_eq!(hashes.len(), keys.len());
    }

    #[test]
    fn top_bits_uniform() {
        for kind in [HashKind::Xxh3, HashKind::Xxh64] {
            let f = HashFunction::new(kind, 0);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let n = 1_000_000u64;
            let mut buckets = [0u64; 256];
            for _ in 0..n {
                buckets[(f.hash(&rng.random::<u64>()) >> 56) as usize] += 1;
            }
            let expected = n as f64 / 256.0;
            let chi2: f64 = buckets
                .iter()
                .map(|&c| (c as f64 - expected).powi(2) / expected)
                .sum();
            // 255 degrees of freedom: mean 255, sd sqrt(510)
            assert!(chi2 < 255.0 + 5.0 * 510f64.sqrt(), "{kind}: chi2 = {chi2}");
        }
    }

    #[test]
    fn hash_kind_names() {
        assert_eq!("xxh3-64".parse::<HashKind>().unwrap(), HashKind::Xxh3);
        assert_eq!("xxh64".parse::<HashKind>().unwrap(), HashKind::Xxh64);
        assert!("farmhash".parse::<HashKind>().is_err());
        assert!(HashConfig::new(3, HashFunction::default()).is_err());
        assert!(HashConfig::new(19, HashFunction::default()).is_err());
        assert_eq!(
            HashConfig::new(10, HashFunction::default()).unwrap().m(),
            1024
        );
    }
}

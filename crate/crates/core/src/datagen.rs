//! Reproducible synthetic inputs: random 64-bit integers, random
//! 8-character alphanumeric strings, and raw `(register, rank)` pairs.
//!
//! All streams come from ChaCha8 seeded with a 64-bit value, so a seed
//! pins the data on every platform.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hashing::{clamp_rank, rho, validate_log2m};
use crate::sketch::CardinalitySketch;

pub const ASCII8_ALPHABET: &[u8; 62] =
    b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    U64,
    Ascii8,
    Pair,
}

impl InputKind {
    pub const ALL: [InputKind; 3] = [InputKind::U64, InputKind::Ascii8, InputKind::Pair];

    pub fn name(self) -> &'static str {
        match self {
            InputKind::U64 => "u64",
            InputKind::Ascii8 => "ascii8",
            InputKind::Pair => "pair",
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u64" => Ok(InputKind::U64),
            "ascii8" => Ok(InputKind::Ascii8),
            "pair" => Ok(InputKind::Pair),
            other => Err(Error::InvalidArgument(format!(
                "unknown input kind {other:?}"
            ))),
        }
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ mix64(trial)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataGenConfig {
    pub kind: InputKind,
    pub n: u64,
    /// Register index width; only used by [`InputKind::Pair`].
    pub log2m: u8,
    pub seed: u64,
}

/// A generated input, stored in memory so that timing covers updates only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    U64(Vec<u64>),
    Ascii8(Vec<[u8; 8]>),
    Pair(Vec<(u32, u8)>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::U64(v) => v.len(),
            Dataset::Ascii8(v) => v.len(),
            Dataset::Pair(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> InputKind {
        match self {
            Dataset::U64(_) => InputKind::U64,
            Dataset::Ascii8(_) => InputKind::Ascii8,
            Dataset::Pair(_) => InputKind::Pair,
        }
    }

    /// Feeds elements `range` into `sketch`. Pairs bypass hashing and
    /// must have been generated for the sketch's `m`.
    pub fn feed_range<S: CardinalitySketch>(
        &self,
        sketch: &mut S,
        range: std::ops::Range<usize>,
    ) -> Result<()> {
        match self {
            Dataset::U64(v) => v[range].iter().for_each(|x| sketch.update(x)),
            Dataset::Ascii8(v) => v[range].iter().for_each(|x| sketch.update(x)),
            Dataset::Pair(v) => {
                for &(j, r) in &v[range] {
                    sketch.insert_pair(j as usize, r)?;
                }
            }
        }
        Ok(())
    }

    pub fn feed<S: CardinalitySketch>(&self, sketch: &mut S) -> Result<()> {
        self.feed_range(sketch, 0..self.len())
    }

    /// One text line per element: the integer, the string, or `j r`.
    pub fn write_lines<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        match self {
            Dataset::U64(v) => v.iter().try_for_each(|x| writeln!(out, "{x}")),
            Dataset::Ascii8(v) => v.iter().try_for_each(|x| {
                out.write_all(x)?;
                out.write_all(b"\n")
            }),
            Dataset::Pair(v) => v.iter().try_for_each(|(j, r)| writeln!(out, "{j} {r}")),
        }
    }
}

/// Infinite element source for one configuration.
pub struct Generator {
    rng: ChaCha8Rng,
    kind: InputKind,
    log2m: u8,
}

impl Generator {
    pub fn new(kind: InputKind, log2m: u8, seed: u64) -> Result<Self> {
        if kind == InputKind::Pair {
            validate_log2m(log2m)?;
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            kind,
            log2m,
        })
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    #[inline]
    pub fn next_ascii8(&mut self) -> [u8; 8] {
        std::array::from_fn(|_| ASCII8_ALPHABET[self.rng.random_range(0..ASCII8_ALPHABET.len())])
    }

    /// `j` uniform over `[0, m)`, `r` the clamped rank of a uniform word.
    #[inline]
    pub fn next_pair(&mut self) -> (u32, u8) {
        let j = (self.rng.random::<u64>() >> (64 - self.log2m as u32)) as u32;
        let r = clamp_rank(rho(self.rng.random()));
        (j, r)
    }

    pub fn take(&mut self, n: usize) -> Dataset {
        match self.kind {
            InputKind::U64 => Dataset::U64((0..n).map(|_| self.next_u64()).collect()),
            InputKind::Ascii8 => Dataset::Ascii8((0..n).map(|_| self.next_ascii8()).collect()),
            InputKind::Pair => Dataset::Pair((0..n).map(|_| self.next_pair()).collect()),
        }
    }
}

pub fn generate(cfg: &DataGenConfig) -> Result<Dataset> {
    let n = usize::try_from(cfg.n).map_err(|_| Error::InvalidArgument("n too large".into()))?;
    Ok(Generator::new(cfg.kind, cfg.log2m, cfg.seed)?.take(n))
}

/// `round(2^(i/2))`, ties to even.
pub fn grid_n(i: u32) -> u64 {
    let x = 2f64.powf(i as f64 / 2.0);
    x.round_ties_even() as u64
}

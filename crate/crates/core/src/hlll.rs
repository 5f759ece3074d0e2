//! HyperLogLogLog: a HyperLogLog whose registers are stored as `kappa`-bit
//! offsets from a shared base value, with the registers that do not fit
//! kept in a sorted sparse map.
//!
//! For every register `j`, exactly one of the following holds:
//!
//! * `base <= value(j) < base + 2^kappa`, `j` is absent from the sparse
//!   map, and `dense[j] = value(j) - base`;
//! * `j` is in the sparse map with `value(j)`, and `dense[j] = 0`.
//!
//! The reported size is `m * kappa + |S| * (log2m + 6)` bits, so the goal
//! is to pick the base that keeps the sparse map small. The three variants
//! differ only in how hard they try:
//!
//! * [`Variant::Exact`] recomputes the optimal base after every register
//!   change.
//! * [`Variant::Star`] only reconsiders the base when the sparse map grows,
//!   and only tries the next register value above the current base.
//! * [`Variant::BaseMin`] pins the base to the minimum register value.
//!
//! All three hold exactly the same register values as a plain
//! [`HllSketch`] fed the same stream, so their estimates are identical.

use std::fmt;
use std::str::FromStr;

use crate::bitpack::PackedArray;
use crate::error::{Error, Result};
use crate::estimator::{self, EstimateBreakdown, EstimatorConfig};
use crate::hashing::{clamp_rank, HashConfig, HashFunction, HashKey, MAX_RANK};
use crate::hll::{HllSketch, REGISTER_BITS};
use crate::scalar::Scalar;
use crate::sketch::CardinalitySketch;
use crate::sparse::SparseRegisterMap;

pub const DEFAULT_KAPPA: u8 = 3;
const VALUES: usize = MAX_RANK as usize + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Exact,
    Star,
    BaseMin,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Exact, Variant::Star, Variant::BaseMin];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Exact => "hlll",
            Variant::Star => "hlll-star",
            Variant::BaseMin => "hlll-b",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hlll" | "exact" => Ok(Variant::Exact),
            "hlll-star" | "star" => Ok(Variant::Star),
            "hlll-b" | "base-min" => Ok(Variant::BaseMin),
            other => Err(Error::InvalidArgument(format!(
                "unknown HLLL variant {other:?}"
            ))),
        }
    }
}

/// Work counters. Not part of the sketch's value: ignored by equality and
/// not serialized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HlllStats {
    /// Base re-evaluations (compress calls; for base-min, min changes).
    pub compress_calls: u64,
    pub rebases: u64,
    /// Full passes to recompute the minimum register.
    pub min_rescans: u64,
}

#[derive(Debug, Clone)]
pub struct HlllSketch {
    config: HashConfig,
    kappa: u8,
    variant: Variant,
    base: u8,
    dense: PackedArray,
    sparse: SparseRegisterMap,
    min_value: u8,
    min_count: usize,
    stats: HlllStats,
}

impl PartialEq for HlllSketch {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.kappa == other.kappa
            && self.variant == other.variant
            && self.base == other.base
            && self.dense == other.dense
            && self.sparse == other.sparse
            && self.min_value == other.min_value
            && self.min_count == other.min_count
    }
}

impl Eq for HlllSketch {}

/// Counts of each register value.
type Histogram = [usize; VALUES];

impl HlllSketch {
    pub fn new(log2m: u8, hash: HashFunction, variant: Variant) -> Result<Self> {
        Self::with_kappa(log2m, DEFAULT_KAPPA, hash, variant)
    }

    pub fn with_kappa(log2m: u8, kappa: u8, hash: HashFunction, variant: Variant) -> Result<Self> {
        Self::with_config(HashConfig::new(log2m, hash)?, kappa, variant)
    }

    pub fn with_config(config: HashConfig, kappa: u8, variant: Variant) -> Result<Self> {
        if !(1..=6).contains(&kappa) {
            return Err(Error::InvalidArgument(format!(
                "kappa must be in 1..=6, got {kappa}"
            )));
        }
        Ok(Self {
            dense: PackedArray::new(config.m(), kappa as u32)?,
            sparse: SparseRegisterMap::new(config.log2m()),
            min_value: 0,
            min_count: config.m(),
            config,
            kappa,
            variant,
            base: 0,
            stats: HlllStats::default(),
        })
    }

    /// Reassembles a sketch from stored parts and checks every invariant.
    pub(crate) fn from_parts(
        config: HashConfig,
        kappa: u8,
        variant: Variant,
        base: u8,
        dense: PackedArray,
        sparse: SparseRegisterMap,
    ) -> Result<Self> {
        if !(1..=6).contains(&kappa) {
            return Err(Error::Format(format!("kappa {kappa} out of range")));
        }
        if base > MAX_RANK {
            return Err(Error::Format(format!("base {base} out of range")));
        }
        if dense.len() != config.m() || dense.width() != kappa as u32 {
            return Err(Error::Format(
                "dense array does not match m and kappa".into(),
            ));
        }
        let mut s = Self {
            config,
            kappa,
            variant,
            base,
            dense,
            sparse,
            min_value: 0,
            min_count: 0,
            stats: HlllStats::default(),
        };
        let hist = s.histogram();
        s.refresh_min(&hist);
        s.check_invariants().map_err(Error::Format)?;
        Ok(s)
    }

    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn base(&self) -> u8 {
        self.base
    }

    pub fn dense(&self) -> &PackedArray {
        &self.dense
    }

    pub fn sparse(&self) -> &SparseRegisterMap {
        &self.sparse
    }

    pub fn sparse_len(&self) -> usize {
        self.sparse.len()
    }

    pub fn min_value(&self) -> u8 {
        self.min_value
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn stats(&self) -> HlllStats {
        self.stats
    }

    #[inline]
    fn window(&self) -> u32 {
        1 << self.kappa
    }

    #[inline]
    fn in_window(&self, base: u8, r: u8) -> bool {
        (base as u32..base as u32 + self.window()).contains(&(r as u32))
    }

    #[inline]
    fn value_at(&self, j: usize) -> u8 {
        match self.sparse.get(j) {
            Some(r) => r,
            None => self.base + self.dense.get_unchecked(j) as u8,
        }
    }

    /// Register values in index order, decoded in one pass over the dense
    /// array and the sparse map.
    fn values(&self) -> impl Iterator<Item = u8> + '_ {
        let base = self.base;
        let mut sparse = self.sparse.iter().peekable();
        self.dense
            .iter()
            .enumerate()
            .map(move |(j, off)| match sparse.peek() {
                Some(&(k, r)) if k == j => {
                    sparse.next();
                    r
                }
                _ => base + off as u8,
            })
    }

    fn histogram(&self) -> Histogram {
        let mut offsets = [0usize; 64];
        for o in self.dense.iter() {
            offsets[o as usize] += 1;
        }
        // sparse registers keep a zero dense slot
        offsets[0] -= self.sparse.len();
        let mut hist = [0usize; VALUES];
        for (o, &c) in offsets.iter().enumerate().take(self.window() as usize) {
            if c > 0 {
                hist[self.base as usize + o] += c;
            }
        }
        for (_, r) in self.sparse.iter() {
            hist[r as usize] += 1;
        }
        hist
    }

    fn refresh_min(&mut self, hist: &Histogram) {
        let min = hist.iter().position(|&c| c > 0).unwrap_or(0);
        self.min_value = min as u8;
        self.min_count = hist[min];
    }

    fn dense_count(&self, hist: &Histogram, base: u8) -> usize {
        let lo = base as usize;
        let hi = (lo + self.window() as usize).min(VALUES);
        hist[lo..hi].iter().sum()
    }

    /// Smallest register value that maximises the number of dense registers.
    fn optimal_base(&self, hist: &Histogram) -> u8 {
        let m = self.m();
        let w = self.window() as usize;
        let mut best = (self.min_value, usize::MAX);
        // registers strictly below the candidate; sparse for it and every
        // larger candidate
        let mut below = 0usize;
        // registers in [v, v + w)
        let mut inside: usize = hist[..w.min(VALUES)].iter().sum();
        for v in 0..VALUES {
            if below >= best.1 {
                break;
            }
            if hist[v] > 0 {
                let sparse = m - inside;
                if sparse < best.1 {
                    best = (v as u8, sparse);
                }
            }
            below += hist[v];
            inside -= hist[v];
            if v + w < VALUES {
                inside += hist[v + w];
            }
        }
        best.0
    }

    /// Moves to the optimal base if it differs from the current one.
    pub fn compress(&mut self) {
        self.stats.compress_calls += 1;
        let hist = self.histogram();
        let best = self.optimal_base(&hist);
        if best != self.base {
            self.rebase(best);
        }
    }

    /// Tries only the next register value above the base, accepting it if
    /// it does not shrink the dense region.
    fn compress_star(&mut self) {
        self.stats.compress_calls += 1;
        let hist = self.histogram();
        let next = (self.base as usize + 1..VALUES).find(|&v| hist[v] > 0);
        if let Some(next) = next {
            let next = next as u8;
            if self.dense_count(&hist, next) >= self.dense_count(&hist, self.base) {
                self.rebase(next);
            }
        }
    }

    /// Re-places every register relative to `new_base`. Register values are
    /// unchanged. One linear pass over the dense array and sparse map.
    pub fn rebase(&mut self, new_base: u8) {
        assert!(new_base <= MAX_RANK, "base {new_base} out of range");
        if new_base == self.base {
            return;
        }
        self.stats.rebases += 1;
        let old = std::mem::replace(
            &mut self.sparse,
            SparseRegisterMap::with_capacity(self.config.log2m(), 0),
        );
        let mut sparse = SparseRegisterMap::with_capacity(self.config.log2m(), old.len().max(4));
        let mut old_iter = old.iter().peekable();
        for j in 0..self.m() {
            let r = match old_iter.peek() {
                Some(&(k, r)) if k == j => {
                    old_iter.next();
                    r
                }
                _ => self.base + self.dense.get_unchecked(j) as u8,
            };
            if self.in_window(new_base, r) {
                self.dense.set_unchecked(j, (r - new_base) as u64);
            } else {
                self.dense.set_unchecked(j, 0);
                sparse.push_sorted(j, r);
            }
        }
        self.sparse = sparse;
        self.base = new_base;
    }

    #[inline]
    fn raise(&mut self, j: usize, r: u8) {
        let r = clamp_rank(r);
        if r <= self.min_value {
            return;
        }
        let old = self.value_at(j);
        if r <= old {
            return;
        }
        let mut grew = false;
        if self.in_window(self.base, r) {
            self.dense.set_unchecked(j, (r - self.base) as u64);
            if !self.in_window(self.base, old) {
                self.sparse.remove(j);
            }
        } else {
            grew = self.sparse.insert(j, r);
            self.dense.set_unchecked(j, 0);
        }

        let mut min_moved = false;
        if old == self.min_value {
            self.min_count -= 1;
            if self.min_count == 0 {
                self.stats.min_rescans += 1;
                let hist = self.histogram();
                self.refresh_min(&hist);
                min_moved = true;
            }
        }

        match self.variant {
            Variant::Exact => self.compress(),
            Variant::Star => {
                if grew {
                    self.compress_star();
                }
            }
            Variant::BaseMin => {
                if min_moved {
                    self.stats.compress_calls += 1;
                    self.rebase(self.min_value);
                }
            }
        }
    }

    /// Re-establishes the variant's base policy after a bulk change.
    fn settle(&mut self) {
        let hist = self.histogram();
        self.refresh_min(&hist);
        match self.variant {
            Variant::Exact | Variant::Star => self.compress(),
            Variant::BaseMin => {
                self.stats.compress_calls += 1;
                self.rebase(self.min_value);
            }
        }
    }

    fn check_compatible(&self, other: &HlllSketch) -> Result<()> {
        if self.config != other.config || self.kappa != other.kappa {
            return Err(Error::IncompatibleSketch(format!(
                "HLLL parameters differ: log2m {} / {}, kappa {} / {}, hash {} / {}",
                self.log2m(),
                other.log2m(),
                self.kappa,
                other.kappa,
                fmt_hash(&self.config.function),
                fmt_hash(&other.config.function),
            )));
        }
        Ok(())
    }

    /// Merges in the compressed domain: both inputs are walked in index
    /// order and the maxima placed relative to the larger base. The result
    /// takes `self`'s variant.
    pub fn merge(&self, other: &HlllSketch) -> Result<HlllSketch> {
        self.check_compatible(other)?;
        let base = self.base.max(other.base);
        let mut out = HlllSketch::with_config(self.config, self.kappa, self.variant)?;
        out.base = base;
        out.stats = self.stats;
        let mut sparse = SparseRegisterMap::with_capacity(self.log2m(), self.sparse.len().max(4));
        for (j, (a, b)) in self.values().zip(other.values()).enumerate() {
            let r = a.max(b);
            if out.in_window(base, r) {
                out.dense.set_unchecked(j, (r - base) as u64);
            } else {
                sparse.push_sorted(j, r);
            }
        }
        out.sparse = sparse;
        out.settle();
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &HlllSketch) -> Result<()> {
        *self = self.merge(other)?;
        Ok(())
    }

    pub fn to_hll(&self) -> HllSketch {
        let mut hll = HllSketch::with_config(self.config).expect("config already validated");
        for (j, r) in self.values().enumerate() {
            hll.set_register(j, r);
        }
        hll
    }

    pub fn from_hll(hll: &HllSketch, kappa: u8, variant: Variant) -> Result<HlllSketch> {
        let mut out = HlllSketch::with_config(*hll.hash_config(), kappa, variant)?;
        let mut sparse = SparseRegisterMap::new(hll.log2m());
        for (j, r) in hll.registers().enumerate() {
            if out.in_window(0, r) {
                out.dense.set_unchecked(j, r as u64);
            } else {
                sparse.push_sorted(j, r);
            }
        }
        out.sparse = sparse;
        out.settle();
        Ok(out)
    }

    /// Returns a description of the first violated invariant, if any.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.sparse.validate().map_err(|e| e.to_string())?;
        for (j, r) in self.sparse.iter() {
            if j >= self.m() {
                return Err(format!("sparse index {j} >= m"));
            }
            if self.in_window(self.base, r) {
                return Err(format!(
                    "register {j} = {r} is sparse but fits base {}",
                    self.base
                ));
            }
            if self.dense.get_unchecked(j) != 0 {
                return Err(format!("dense slot of sparse register {j} is nonzero"));
            }
        }
        for (j, off) in self.dense.iter().enumerate() {
            if self.base as u64 + off > MAX_RANK as u64 && !self.sparse.contains(j) {
                return Err(format!("register {j} exceeds {MAX_RANK}"));
            }
        }
        let hist = self.histogram();
        let min = hist.iter().position(|&c| c > 0).unwrap_or(0);
        if self.min_value as usize != min || self.min_count != hist[min] {
            return Err(format!(
                "min cache ({}, {}) disagrees with registers ({min}, {})",
                self.min_value, self.min_count, hist[min]
            ));
        }
        match self.variant {
            Variant::Exact => {
                let best = self.optimal_base(&hist);
                if best != self.base {
                    return Err(format!("base {} is not the optimal base {best}", self.base));
                }
            }
            Variant::BaseMin => {
                if self.base != self.min_value {
                    return Err(format!(
                        "base {} differs from minimum register {}",
                        self.base, self.min_value
                    ));
                }
            }
            Variant::Star => {}
        }
        Ok(())
    }
}

fn fmt_hash(f: &HashFunction) -> String {
    format!("{}/{}", f.kind, f.seed)
}

impl CardinalitySketch for HlllSketch {
    fn hash_config(&self) -> &HashConfig {
        &self.config
    }

    #[inline]
    fn update<K: HashKey + ?Sized>(&mut self, key: &K) {
        let (j, r) = self.config.pair(key);
        self.raise(j, r);
    }

    fn insert_pair(&mut self, j: usize, r: u8) -> Result<()> {
        if j >= self.m() {
            return Err(Error::InvalidArgument(format!(
                "register index {j} out of range for m = {}",
                self.m()
            )));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        self.raise(j, r);
        Ok(())
    }

    fn register(&self, j: usize) -> Result<u8> {
        if j >= self.m() {
            return Err(Error::OutOfBounds {
                index: j,
                len: self.m(),
            });
        }
        Ok(self.value_at(j))
    }

    fn registers(&self) -> impl Iterator<Item = u8> + '_ {
        self.values()
    }

    fn estimate_with<F: Scalar>(&self, cfg: &EstimatorConfig) -> EstimateBreakdown<F> {
        estimator::estimate(self.values(), cfg).expect("sketch always holds m registers")
    }

    /// `m * kappa + |S| * (log2m + 6)`; the base and the min cache are
    /// constant overhead and not counted.
    fn size_bits(&self) -> usize {
        self.m() * self.kappa as usize
            + self.sparse.len() * (self.log2m() as usize + REGISTER_BITS as usize)
    }
}

//! Sorted associative array of `(register index, register value)` pairs,
//! packed as `index << 6 | value` into a [`PackedArray`].

use crate::bitpack::PackedArray;
use crate::error::{Error, Result};
use crate::hashing::MAX_RANK;

const VALUE_BITS: u32 = 6;
const VALUE_MASK: u64 = (1 << VALUE_BITS) - 1;
const MIN_CAPACITY: usize = 4;

#[derive(Debug, Clone)]
pub struct SparseRegisterMap {
    log2m: u8,
    /// Slots past `len` are always zero.
    entries: PackedArray,
    len: usize,
}

#[inline]
fn pack(j: usize, r: u8) -> u64 {
    ((j as u64) << VALUE_BITS) | r as u64
}

#[inline]
fn unpack(e: u64) -> (usize, u8) {
    ((e >> VALUE_BITS) as usize, (e & VALUE_MASK) as u8)
}

impl SparseRegisterMap {
    pub fn new(log2m: u8) -> Self {
        Self::with_capacity(log2m, 0)
    }

    pub fn with_capacity(log2m: u8, capacity: usize) -> Self {
        Self {
            log2m,
            entries: PackedArray::new(capacity, Self::entry_width(log2m)).expect("width <= 24"),
            len: 0,
        }
    }

    /// Bits per entry: `log2m + 6`.
    pub fn entry_width(log2m: u8) -> u32 {
        log2m as u32 + VALUE_BITS
    }

    /// Decodes `count` serialized entries, rejecting unsorted, duplicate
    /// or out-of-range content.
    pub fn from_words(log2m: u8, count: usize, words: Vec<u64>) -> Result<Self> {
        let entries = PackedArray::from_words(count, Self::entry_width(log2m), words)?;
        let map = Self {
            log2m,
            entries,
            len: count,
        };
        map.validate()?;
        Ok(map)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let mut prev: Option<usize> = None;
        for (j, r) in self.iter() {
            if prev.is_some_and(|p| p >= j) {
                return Err(Error::Format(
                    "sparse entries not strictly ascending".into(),
                ));
            }
            if r > MAX_RANK {
                return Err(Error::Format(format!("sparse value {r} out of range")));
            }
            prev = Some(j);
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    /// Words holding exactly the live entries, in canonical form.
    pub fn live_words(&self) -> &[u64] {
        let n = crate::bitpack::words_for(self.len, self.entries.width());
        &self.entries.words()[..n]
    }

    #[inline]
    fn key_at(&self, pos: usize) -> usize {
        (self.entries.get_unchecked(pos) >> VALUE_BITS) as usize
    }

    /// Binary search: `Ok(pos)` if present, `Err(insert_pos)` otherwise.
    #[inline]
    fn search(&self, j: usize) -> std::result::Result<usize, usize> {
        let (mut lo, mut hi) = (0usize, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.key_at(mid).cmp(&j) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Ok(mid),
            }
        }
        Err(lo)
    }

    #[inline]
    pub fn get(&self, j: usize) -> Option<u8> {
        self.search(j)
            .ok()
            .map(|pos| unpack(self.entries.get_unchecked(pos)).1)
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.search(j).is_ok()
    }

    fn grow(&mut self) {
        if self.len == self.entries.len() {
            let cap = (self.entries.len() * 2).max(MIN_CAPACITY);
            self.entries.resize(cap);
        }
    }

    /// Inserts or overwrites. Returns `true` when `j` was not present.
    pub fn insert(&mut self, j: usize, r: u8) -> bool {
        debug_assert!(j < 1 << self.log2m && r <= MAX_RANK);
        match self.search(j) {
            Ok(pos) => {
                self.entries.set_unchecked(pos, pack(j, r));
                false
            }
            Err(_) => {
                // append, then insertion-sort the new entry into place
                self.grow();
                let e = pack(j, r);
                let mut pos = self.len;
                while pos > 0 && self.key_at(pos - 1) > j {
                    let prev = self.entries.get_unchecked(pos - 1);
                    self.entries.set_unchecked(pos, prev);
                    pos -= 1;
                }
                self.entries.set_unchecked(pos, e);
                self.len += 1;
                true
            }
        }
    }

    /// Removes `j`, returning its value if it was present.
    pub fn remove(&mut self, j: usize) -> Option<u8> {
        let pos = self.search(j).ok()?;
        let (_, r) = unpack(self.entries.get_unchecked(pos));
        for p in pos..self.len - 1 {
            let next = self.entries.get_unchecked(p + 1);
            self.entries.set_unchecked(p, next);
        }
        self.len -= 1;
        self.entries.set_unchecked(self.len, 0);
        Some(r)
    }

    /// Appends an entry whose index exceeds every stored index.
    #[inline]
    pub(crate) fn push_sorted(&mut self, j: usize, r: u8) {
        debug_assert!(self.is_empty() || self.key_at(self.len - 1) < j);
        self.grow();
        self.entries.set_unchecked(self.len, pack(j, r));
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.entries.iter().take(self.len).map(unpack)
    }
}

impl PartialEq for SparseRegisterMap {
    fn eq(&self, other: &Self) -> bool {
        self.log2m == other.log2m
            && self.len == other.len
            && self.live_words() == other.live_words()
    }
}

impl Eq for SparseRegisterMap {}

//! Fixed-width bit-packed integer arrays over 64-bit words.
//!
//! Element `i` occupies stream bits `i*width .. (i+1)*width`, least
//! significant bit first. Stream bit `k` lives in word `k / 64` at bit
//! `k % 64`. Elements may straddle a word boundary. Bits past the last
//! element are always zero, so two arrays with equal contents have equal
//! word vectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedArray {
    width: u32,
    mask: u64,
    len: usize,
    /// `words_for(len, width)` payload words plus one zero padding word.
    words: Vec<u64>,
}

#[inline]
fn mask(width: u32) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[inline]
pub(crate) fn words_for(len: usize, width: u32) -> usize {
    (len * width as usize).div_ceil(64)
}

impl PackedArray {
    /// Creates a zero-filled array of `len` elements, `width` bits each.
    pub fn new(len: usize, width: u32) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidArgument(format!(
                "packed width must be in 1..=64, got {width}"
            )));
        }
        Ok(Self {
            width,
            mask: mask(width),
            len,
            words: vec![0; words_for(len, width) + 1],
        })
    }

    /// Rebuilds an array from its serialized words, rejecting
    /// non-canonical input (wrong word count or stray trailing bits).
    pub fn from_words(len: usize, width: u32, mut words: Vec<u64>) -> Result<Self> {
        let arr = Self::new(0, width)?;
        let expected = words_for(len, width);
        if words.len() != expected {
            return Err(Error::Format(format!(
                "packed array of {len}x{width} bits needs {expected} words, got {}",
                words.len()
            )));
        }
        let used = len * width as usize;
        if !used.is_multiple_of(64) {
            let last = words[expected - 1];
            if last >> (used % 64) != 0 {
                return Err(Error::Format(
                    "nonzero trailing bits in packed array".into(),
                ));
            }
        }
        words.push(0);
        Ok(Self { words, len, ..arr })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    /// The packed payload, without the padding word.
    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words[..self.words.len() - 1]
    }

    /// Storage footprint in bits, rounded up to whole words.
    pub fn allocated_bits(&self) -> usize {
        self.words().len() * 64
    }

    pub fn get(&self, i: usize) -> Result<u64> {
        if i >= self.len {
            return Err(Error::OutOfBounds {
                index: i,
                len: self.len,
            });
        }
        Ok(self.get_unchecked(i))
    }

    pub fn set(&mut self, i: usize, v: u64) -> Result<()> {
        if i >= self.len {
            return Err(Error::OutOfBounds {
                index: i,
                len: self.len,
            });
        }
        if v & !self.mask != 0 {
            return Err(Error::InvalidArgument(format!(
                "value {v} does not fit in {} bits",
                self.width
            )));
        }
        self.set_unchecked(i, v);
        Ok(())
    }

    /// Reads element `i`. Caller guarantees `i < len`.
    #[inline]
    pub(crate) fn get_unchecked(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let bit = i * self.width as usize;
        let word = bit / 64;
        let shift = bit % 64;
        // the word after the last element is padding, so both reads are in
        // bounds and no branch is needed for elements that cross words
        let pair = self.words[word] as u128 | (self.words[word + 1] as u128) << 64;
        (pair >> shift) as u64 & self.mask
    }

    /// Writes element `i`. Caller guarantees `i < len` and `v` fits.
    #[inline]
    pub(crate) fn set_unchecked(&mut self, i: usize, v: u64) {
        debug_assert!(i < self.len);
        debug_assert!(v & !self.mask == 0);
        let m = self.mask;
        let bit = i * self.width as usize;
        let word = bit / 64;
        let shift = (bit % 64) as u32;
        self.words[word] = (self.words[word] & !(m << shift)) | (v << shift);
        let spill = shift + self.width;
        if spill > 64 {
            let hi_bits = spill - 64;
            let hi_mask = mask(hi_bits);
            let w = &mut self.words[word + 1];
            *w = (*w & !hi_mask) | (v >> (64 - shift));
        }
    }

    /// Sets every element to zero without reallocating.
    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// Grows or shrinks the element count. New elements read as zero.
    pub(crate) fn resize(&mut self, len: usize) {
        if len < self.len {
            for i in len..self.len {
                self.set_unchecked(i, 0);
            }
        }
        self.len = len;
        self.words.resize(words_for(len, self.width) + 1, 0);
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { arr: self, pos: 0 }
    }
}

pub struct Iter<'a> {
    arr: &'a PackedArray,
    pos: usize,
}

impl Iterator for Iter<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.arr.len {
            return None;
        }
        let v = self.arr.get_unchecked(self.pos);
        self.pos += 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = self.arr.len - self.pos;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for Iter<'_> {}

impl<'a> IntoIterator for &'a PackedArray {
    type Item = u64;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

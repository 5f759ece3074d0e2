//! Binary sketch format (`.hlls`).
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HLLL"
//! 4       1     version (1)
//! 5       1     kind: 0 HLL, 1 HLLL exact, 2 HLLL star, 3 HLLL base-min
//! 6       1     log2m
//! 7       1     kappa (0 for HLL)
//! 8       1     base (0 for HLL)
//! 9       1     hash id length L
//! 10      L     hash id, ASCII
//! 10+L    8     hash seed
//! 18+L    8     sparse entry count (0 for HLL)
//! 26+L    ...   dense words, then sparse words
//! ```
//!
//! Integers and 64-bit words are little-endian. The payload length follows
//! from the header. Malformed input is rejected, never repaired.

use crate::bitpack::{words_for, PackedArray};
use crate::error::{Error, Result};
use crate::estimator::{EstimateBreakdown, EstimatorConfig};
use crate::hashing::{HashConfig, HashFunction, HashKind};
use crate::hll::{HllSketch, REGISTER_BITS};
use crate::hlll::{HlllSketch, Variant};
use crate::scalar::Scalar;
use crate::sketch::CardinalitySketch;
use crate::sparse::SparseRegisterMap;

pub const MAGIC: &[u8; 4] = b"HLLL";
pub const VERSION: u8 = 1;
pub const FILE_EXTENSION: &str = "hlls";

/// Either sketch type, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sketch {
    Hll(HllSketch),
    Hlll(HlllSketch),
}

impl Sketch {
    pub fn kind_code(&self) -> u8 {
        match self {
            Sketch::Hll(_) => 0,
            Sketch::Hlll(s) => match s.variant() {
                Variant::Exact => 1,
                Variant::Star => 2,
                Variant::BaseMin => 3,
            },
        }
    }

    pub fn algorithm(&self) -> &'static str {
        match self {
            Sketch::Hll(_) => "hll",
            Sketch::Hlll(s) => s.variant().name(),
        }
    }

    pub fn hash_config(&self) -> &HashConfig {
        match self {
            Sketch::Hll(s) => s.hash_config(),
            Sketch::Hlll(s) => s.hash_config(),
        }
    }

    pub fn estimate(&self) -> f64 {
        match self {
            Sketch::Hll(s) => s.estimate(),
            Sketch::Hlll(s) => s.estimate(),
        }
    }

    pub fn estimate_with<F: Scalar>(&self, cfg: &EstimatorConfig) -> EstimateBreakdown<F> {
        match self {
            Sketch::Hll(s) => s.estimate_with(cfg),
            Sketch::Hlll(s) => s.estimate_with(cfg),
        }
    }

    /// Compressions performed since construction; always 0 for HLL.
    pub fn compress_calls(&self) -> u64 {
        match self {
            Sketch::Hll(_) => 0,
            Sketch::Hlll(s) => s.stats().compress_calls,
        }
    }

    pub fn size_bits(&self) -> usize {
        match self {
            Sketch::Hll(s) => s.size_bits(),
            Sketch::Hlll(s) => s.size_bits(),
        }
    }

    pub fn registers(&self) -> Vec<u8> {
        match self {
            Sketch::Hll(s) => s.registers().collect(),
            Sketch::Hlll(s) => s.registers().collect(),
        }
    }

    /// Merges two stored sketches. HLL only merges with HLL, HLLL only
    /// with HLLL.
    pub fn merge(&self, other: &Sketch) -> Result<Sketch> {
        match (self, other) {
            (Sketch::Hll(a), Sketch::Hll(b)) => a.merge(b).map(Sketch::Hll),
            (Sketch::Hlll(a), Sketch::Hlll(b)) => a.merge(b).map(Sketch::Hlll),
            _ => Err(Error::IncompatibleSketch(format!(
                "cannot merge {} with {}",
                self.algorithm(),
                other.algorithm()
            ))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serialize(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Sketch> {
        deserialize(bytes)
    }
}

impl From<HllSketch> for Sketch {
    fn from(s: HllSketch) -> Self {
        Sketch::Hll(s)
    }
}

impl From<HlllSketch> for Sketch {
    fn from(s: HlllSketch) -> Self {
        Sketch::Hlll(s)
    }
}

fn put_words(out: &mut Vec<u8>, words: &[u64]) {
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
}

pub fn serialize(sketch: &Sketch) -> Vec<u8> {
    let cfg = sketch.hash_config();
    let hash_id = cfg.function.kind.id().as_bytes();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(sketch.kind_code());
    out.push(cfg.log2m());
    match sketch {
        Sketch::Hll(_) => out.extend_from_slice(&[0, 0]),
        Sketch::Hlll(s) => out.extend_from_slice(&[s.kappa(), s.base()]),
    }
    out.push(hash_id.len() as u8);
    out.extend_from_slice(hash_id);
    out.extend_from_slice(&cfg.function.seed.to_le_bytes());
    match sketch {
        Sketch::Hll(s) => {
            out.extend_from_slice(&0u64.to_le_bytes());
            put_words(&mut out, s.packed_registers().words());
        }
        Sketch::Hlll(s) => {
            out.extend_from_slice(&(s.sparse_len() as u64).to_le_bytes());
            put_words(&mut out, s.dense().words());
            put_words(&mut out, s.sparse().live_words());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated input while reading {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn words(&mut self, n: usize, what: &str) -> Result<Vec<u64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("{what} too large")))?;
        Ok(self
            .take(bytes, what)?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<Sketch> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind = r.u8("kind")?;
    let variant = match kind {
        0 => None,
        1 => Some(Variant::Exact),
        2 => Some(Variant::Star),
        3 => Some(Variant::BaseMin),
        k => return Err(Error::Format(format!("unknown sketch kind {k}"))),
    };
    let log2m = r.u8("log2m")?;
    let kappa = r.u8("kappa")?;
    let base = r.u8("base")?;
    let id_len = r.u8("hash id length")? as usize;
    let id = std::str::from_utf8(r.take(id_len, "hash id")?)
        .map_err(|_| Error::Format("hash id is not UTF-8".into()))?;
    let hash_kind: HashKind = id
        .parse()
        .map_err(|_| Error::Format(format!("unknown hash {id:?}")))?;
    if hash_kind.id() != id {
        return Err(Error::Format(format!("non-canonical hash id {id:?}")));
    }
    let seed = r.u64("seed")?;
    let config = HashConfig::new(log2m, HashFunction::new(hash_kind, seed))
        .map_err(|e| Error::Format(e.to_string()))?;
    let sparse_count = r.u64("sparse count")?;
    let m = config.m();

    let sketch = match variant {
        None => {
            if kappa != 0 || base != 0 || sparse_count != 0 {
                return Err(Error::Format("HLL header has nonzero HLLL fields".into()));
            }
            let words = r.words(words_for(m, REGISTER_BITS), "registers")?;
            let regs = PackedArray::from_words(m, REGISTER_BITS, words)?;
            Sketch::Hll(HllSketch::from_parts(config, regs)?)
        }
        Some(variant) => {
            if !(1..=6).contains(&kappa) {
                return Err(Error::Format(format!("kappa {kappa} out of range")));
            }
            if sparse_count > m as u64 {
                return Err(Error::Format(format!(
                    "sparse count {sparse_count} exceeds m"
                )));
            }
            let count = sparse_count as usize;
            let dense_words = r.words(words_for(m, kappa as u32), "dense array")?;
            let dense = PackedArray::from_words(m, kappa as u32, dense_words)?;
            let width = SparseRegisterMap::entry_width(log2m);
            let sparse_words = r.words(words_for(count, width), "sparse map")?;
            let sparse = SparseRegisterMap::from_words(log2m, count, sparse_words)?;
            Sketch::Hlll(HlllSketch::from_parts(
                config, kappa, variant, base, dense, sparse,
            )?)
        }
    };
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(sketch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_hlll(variant: Variant) -> HlllSketch {
        let mut s = HlllSketch::new(5, HashFunction::new(HashKind::Xxh64, 3), variant).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..400 {
            s.update(&rng.random::<u64>());
        }
        s.insert_pair(1, 50).unwrap();
        s
    }

    #[test]
    fn fresh_hll_layout() {
        let s = HllSketch::new(4, HashFunction::default()).unwrap();
        let bytes = serialize(&s.into());
        // 10 fixed + "xxh3-64" + seed + count + 2 words
        assert_eq!(bytes.len(), 10 + 7 + 8 + 8 + 16);
        assert_eq!(&bytes[..4], b"HLLL");
        assert_eq!(&bytes[4..10], &[1, 0, 4, 0, 0, 7]);
        assert_eq!(&bytes[10..17], b"xxh3-64");
        assert!(bytes[17..].iter().all(|&b| b == 0));
    }

    #[test]
    fn hlll_layout() {
        let s = sample_hlll(Variant::Exact);
        let bytes = serialize(&s.clone().into());
        assert_eq!(bytes[5], 1);
        assert_eq!(bytes[7], 3);
        assert_eq!(bytes[8], s.base());
        let count = u64::from_le_bytes(bytes[23..31].try_into().unwrap());
        assert_eq!(count as usize, s.sparse_len());
        let sparse_words = (count as usize * 11).div_ceil(64);
        assert_eq!(bytes.len(), 31 + 8 * (2 + sparse_words));
    }

    #[test]
    fn roundtrip_all_kinds() {
        let mut hll = HllSketch::new(6, HashFunction::default()).unwrap();
        (0..500u64).for_each(|k| hll.update(&k));
        let mut all: Vec<Sketch> = vec![hll.into()];
        all.extend(Variant::ALL.map(|v| Sketch::Hlll(sample_hlll(v))));
        for s in all {
            let bytes = s.to_bytes();
            let back = Sketch::from_bytes(&bytes).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_bytes(), bytes);
        }
    }

    #[test]
    fn rejects_malformed() {
        let good = Sketch::Hlll(sample_hlll(Variant::Exact)).to_bytes();
        let corrupt = |i: usize, v: u8| {
            let mut b = good.clone();
            b[i] = v;
            deserialize(&b)
        };
        assert!(matches!(corrupt(0, b'X'), Err(Error::Format(_))));
        assert!(matches!(corrupt(4, 2), Err(Error::Format(_))));
        assert!(matches!(corrupt(5, 9), Err(Error::Format(_))));
        assert!(matches!(corrupt(6, 30), Err(Error::Format(_))));
        assert!(matches!(corrupt(7, 0), Err(Error::Format(_))));
        assert!(matches!(corrupt(10, b'z'), Err(Error::Format(_))));
        for cut in [0, 3, 9, 20, good.len() - 1] {
            assert!(
                matches!(deserialize(&good[..cut]), Err(Error::Format(_))),
                "cut {cut}"
            );
        }
        let mut extra = good.clone();
        extra.push(0);
        assert!(matches!(deserialize(&extra), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_unsorted_sparse_payload() {
        let mut s = HlllSketch::new(4, HashFunction::default(), Variant::Exact).unwrap();
        s.insert_pair(2, 40).unwrap();
        s.insert_pair(9, 41).unwrap();
        let mut bytes = Sketch::Hlll(s).to_bytes();
        let n = bytes.len();
        let w = u64::from_le_bytes(bytes[n - 8..].try_into().unwrap());
        let swapped = (w >> 10) | ((w & 0x3ff) << 10);
        bytes[n - 8..].copy_from_slice(&swapped.to_le_bytes());
        assert!(matches!(deserialize(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_broken_invariants() {
        // a suboptimal base for the exact variant
        let mut s = HlllSketch::new(4, HashFunction::default(), Variant::Star).unwrap();
        s.insert_pair(0, 30).unwrap();
        s.rebase(30);
        let mut bytes = Sketch::Hlll(s).to_bytes();
        assert!(deserialize(&bytes).is_ok());
        bytes[5] = 1;
        assert!(matches!(deserialize(&bytes), Err(Error::Format(_))));
        // base-min with base above the minimum
        let mut e = HlllSketch::new(4, HashFunction::default(), Variant::Exact).unwrap();
        for j in 1..16 {
            e.insert_pair(j, 10).unwrap();
        }
        assert_eq!((e.base(), e.min_value()), (10, 0));
        let mut b = Sketch::Hlll(e).to_bytes();
        assert!(deserialize(&b).is_ok());
        b[5] = 3;
        assert!(matches!(deserialize(&b), Err(Error::Format(_))));
        b[5] = 2;
        assert!(deserialize(&b).is_ok());
    }

    #[test]
    fn merge_kind_mismatch() {
        let a = Sketch::Hll(HllSketch::new(4, HashFunction::default()).unwrap());
        let b = Sketch::Hlll(HlllSketch::new(4, HashFunction::default(), Variant::Exact).unwrap());
        assert!(matches!(a.merge(&b), Err(Error::IncompatibleSketch(_))));
        assert!(a.merge(&a).is_ok());
    }
}

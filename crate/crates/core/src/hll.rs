//! Plain HyperLogLog: `m` six-bit registers.

use crate::bitpack::PackedArray;
use crate::error::{Error, Result};
use crate::estimator::{self, EstimateBreakdown, EstimatorConfig};
use crate::hashing::{clamp_rank, HashConfig, HashFunction, HashKey};
use crate::scalar::Scalar;
use crate::sketch::CardinalitySketch;

pub const REGISTER_BITS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HllSketch {
    config: HashConfig,
    registers: PackedArray,
}

impl HllSketch {
    pub fn new(log2m: u8, hash: HashFunction) -> Result<Self> {
        let config = HashConfig::new(log2m, hash)?;
        Self::with_config(config)
    }

    pub fn with_config(config: HashConfig) -> Result<Self> {
        Ok(Self {
            registers: PackedArray::new(config.m(), REGISTER_BITS)?,
            config,
        })
    }

    /// Wraps an existing register array; values must already be valid ranks.
    pub(crate) fn from_parts(config: HashConfig, registers: PackedArray) -> Result<Self> {
        if registers.len() != config.m() || registers.width() != REGISTER_BITS {
            return Err(Error::Format("register array does not match m".into()));
        }
        Ok(Self { config, registers })
    }

    pub(crate) fn packed_registers(&self) -> &PackedArray {
        &self.registers
    }

    #[inline]
    fn raise(&mut self, j: usize, r: u8) {
        let r = clamp_rank(r) as u64;
        if self.registers.get_unchecked(j) < r {
            self.registers.set_unchecked(j, r);
        }
    }

    /// Elementwise maximum of two sketches built with the same parameters.
    pub fn merge(&self, other: &HllSketch) -> Result<HllSketch> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &HllSketch) -> Result<()> {
        if self.config != other.config {
            return Err(Error::IncompatibleSketch(format!(
                "HLL parameters differ: {:?} vs {:?}",
                self.config, other.config
            )));
        }
        for (j, r) in other.registers.iter().enumerate() {
            if r > self.registers.get_unchecked(j) {
                self.registers.set_unchecked(j, r);
            }
        }
        Ok(())
    }

    /// Sets a register directly. Used by conversion and tests.
    pub(crate) fn set_register(&mut self, j: usize, r: u8) {
        self.registers.set_unchecked(j, r as u64);
    }
}

impl CardinalitySketch for HllSketch {
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
        self.registers.get(j).map(|v| v as u8)
    }

    fn registers(&self) -> impl Iterator<Item = u8> + '_ {
        self.registers.iter().map(|v| v as u8)
    }

    fn estimate_with<F: Scalar>(&self, cfg: &EstimatorConfig) -> EstimateBreakdown<F> {
        estimator::estimate(self.registers(), cfg).expect("sketch always holds m registers")
    }

    /// `6m`.
    fn size_bits(&self) -> usize {
        REGISTER_BITS as usize * self.m()
    }
}

use crate::error::Result;
use crate::estimator::{EstimateBreakdown, EstimatorConfig};
use crate::hashing::{HashConfig, HashKey};
use crate::scalar::Scalar;

/// Operations common to every register-based sketch in this crate.
pub trait CardinalitySketch {
    fn hash_config(&self) -> &HashConfig;

    /// Hashes `key` and folds it into the sketch.
    fn update<K: HashKey + ?Sized>(&mut self, key: &K);

    /// Folds a precomputed `(register, rank)` pair into the sketch,
    /// bypassing hashing. Ranks above 63 are clamped.
    fn insert_pair(&mut self, j: usize, r: u8) -> Result<()>;

    fn register(&self, j: usize) -> Result<u8>;

    /// All register values in ascending index order.
    fn registers(&self) -> impl Iterator<Item = u8> + '_;

    fn estimate_with<F: Scalar>(&self, cfg: &EstimatorConfig) -> EstimateBreakdown<F>;

    /// Reported sketch size in bits.
    fn size_bits(&self) -> usize;

    fn log2m(&self) -> u8 {
        self.hash_config().log2m()
    }

    fn m(&self) -> usize {
        self.hash_config().m()
    }

    fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig::new(self.m()).expect("m validated at construction")
    }

    fn estimate(&self) -> f64 {
        self.estimate_with::<f64>(&self.estimator_config()).result
    }
}

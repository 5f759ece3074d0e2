//! Mergeable cardinality sketches: HyperLogLog and the compressed
//! HyperLogLogLog, which stores the same registers in roughly half the bits.
//!
//! ```
//! use hlll_core::{CardinalitySketch, HashFunction, HllSketch, HlllSketch, Variant};
//!
//! let mut hll = HllSketch::new(10, HashFunction::default()).unwrap();
//! let mut hlll = HlllSketch::new(10, HashFunction::default(), Variant::Exact).unwrap();
//! for x in 0..10_000u64 {
//!     hll.update(&x);
//!     hlll.update(&x);
//! }
//! assert_eq!(hll.estimate(), hlll.estimate());
//! assert!(hlll.size_bits() < hll.size_bits());
//! ```
//!
//! The estimator and the distribution oracle are generic over the float
//! type ([`Scalar`]); the aliases below fix it to `f64`.

pub mod bitpack;
pub mod datagen;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod hashing;
pub mod hll;
pub mod hlll;
pub mod io;
pub mod scalar;
pub mod sketch;
pub mod sparse;

pub use bitpack::PackedArray;
pub use error::{Error, Result};
pub use estimator::{alpha, estimate, EstimateBranch, EstimatorConfig};
pub use hashing::{
    clamp_rank, register_index, rho, HashConfig, HashFunction, HashKey, HashKind, MAX_RANK,
};
pub use hll::HllSketch;
pub use hlll::{HlllSketch, HlllStats, Variant, DEFAULT_KAPPA};
pub use io::{deserialize, serialize, Sketch};
pub use scalar::Scalar;
pub use sketch::CardinalitySketch;
pub use sparse::SparseRegisterMap;

/// Estimator output in double precision.
pub type EstimateBreakdown = estimator::EstimateBreakdown<f64>;
/// Estimator output in single precision.
pub type EstimateBreakdownF32 = estimator::EstimateBreakdown<f32>;
/// Register distribution oracle in double precision.
pub type RegisterDistribution = distribution::RegisterDistribution<f64>;

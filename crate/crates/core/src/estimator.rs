//! The HyperLogLog cardinality estimator.
//!
//! Shared verbatim by [`HllSketch`](crate::HllSketch) and
//! [`HlllSketch`](crate::HlllSketch): both feed their register values in
//! ascending index order, so identical registers give bit-identical
//! estimates regardless of how they are stored.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const TWO_POW_32: f64 = 4_294_967_296.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub m: usize,
    pub large_range_correction: bool,
}

impl EstimatorConfig {
    pub fn new(m: usize) -> Result<Self> {
        if !m.is_power_of_two() || m < 16 {
            return Err(Error::InvalidArgument(format!(
                "register count must be a power of two >= 16, got {m}"
            )));
        }
        Ok(Self {
            m,
            large_range_correction: true,
        })
    }

    pub fn with_large_range_correction(mut self, on: bool) -> Self {
        self.large_range_correction = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateBranch {
    LinearCounting,
    LargeRange,
    Raw,
}

impl EstimateBranch {
    pub fn name(self) -> &'static str {
        match self {
            EstimateBranch::LinearCounting => "linear-counting",
            EstimateBranch::LargeRange => "large-range",
            EstimateBranch::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateBreakdown<F> {
    /// Bias-corrected harmonic mean.
    pub raw: F,
    /// Number of zero registers.
    pub zeros: usize,
    pub branch: EstimateBranch,
    pub result: F,
}

/// Bias constant for `m` registers.
pub fn alpha<F: Scalar>(m: usize) -> Result<F> {
    let a = match m {
        16 => 0.673,
        32 => 0.697,
        64 => 0.709,
        m if m >= 128 && m.is_power_of_two() => {
            let m = F::from_usize(m).unwrap();
            return Ok(F::c(0.7213) / (F::one() + F::c(1.079) / m));
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no bias constant for m = {m}"
            )));
        }
    };
    Ok(F::c(a))
}

/// Estimates the cardinality from register values given in index order.
/// Exactly `cfg.m` values must be supplied.
pub fn estimate<F, I>(registers: I, cfg: &EstimatorConfig) -> Result<EstimateBreakdown<F>>
where
    F: Scalar,
    I: IntoIterator<Item = u8>,
{
    let alpha = alpha::<F>(cfg.m)?;
    let mut sum = F::zero();
    let mut zeros = 0usize;
    let mut count = 0usize;
    for r in registers {
        sum = sum + F::pow2_neg(r);
        zeros += (r == 0) as usize;
        count += 1;
    }
    if count != cfg.m {
        return Err(Error::InvalidArgument(format!(
            "estimator expects {} registers, got {count}",
            cfg.m
        )));
    }
    let m = F::from_usize(cfg.m).unwrap();
    let raw = alpha * m * m / sum;

    let two32 = F::c(TWO_POW_32);
    let (branch, result) = if raw <= F::c(2.5) * m && zeros != 0 {
        let v = F::from_usize(zeros).unwrap();
        (EstimateBranch::LinearCounting, m * (m / v).ln())
    } else if cfg.large_range_correction && raw > two32 / F::c(30.0) && raw < two32 {
        (
            EstimateBranch::LargeRange,
            -two32 * (F::one() - raw / two32).ln(),
        )
    } else {
        (EstimateBranch::Raw, raw)
    };
    Ok(EstimateBreakdown {
        raw,
        zeros,
        branch,
        result,
    })
}

//! Exact distribution of a single register after `n` distinct updates to
//! `m` registers, and related quantities. Used as a test oracle.
//!
//! `Pr[M[j] <= k] = (1 - 1/(m 2^k))^n`, with all mass above 62 lumped at 63
//! to mirror rank clamping. Powers are evaluated as `exp(n * ln_1p(-x))` so
//! large `n` does not underflow or lose precision.

use crate::error::{Error, Result};
use crate::hashing::MAX_RANK;
use crate::scalar::Scalar;

fn check_domain(m: u64, k: u8) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    if k > MAX_RANK {
        return Err(Error::InvalidArgument(format!(
            "register value {k} exceeds {MAX_RANK}"
        )));
    }
    Ok(())
}

/// `n * ln(1 - 2^-x / m)`, the log of the continuous cdf.
#[inline]
fn log_cdf<F: Scalar>(m: u64, n: u64, x: F) -> F {
    if n == 0 {
        return F::zero();
    }
    let m = F::from_u64(m).unwrap();
    let n = F::from_u64(n).unwrap();
    n * (-(F::c(2.0).powf(-x) / m)).ln_1p()
}

/// `Pr[M[j] <= k]`.
pub fn pr_register_leq<F: Scalar>(m: u64, n: u64, k: u8) -> Result<F> {
    check_domain(m, k)?;
    if k == MAX_RANK {
        return Ok(F::one());
    }
    Ok(log_cdf(m, n, F::from_u8(k).unwrap()).exp())
}

/// `Pr[M[j] = k]`.
pub fn pr_register_eq<F: Scalar>(m: u64, n: u64, k: u8) -> Result<F> {
    check_domain(m, k)?;
    let at = |k: u8| log_cdf::<F>(m, n, F::from_u8(k).unwrap());
    Ok(match k {
        0 => at(0).exp(),
        MAX_RANK => -at(MAX_RANK - 1).exp_m1(),
        k => {
            let (hi, lo) = (at(k), at(k - 1));
            // the expm1 form only matters when the two cdf values are close
            if hi - lo > F::one() {
                hi.exp() - lo.exp()
            } else {
                lo.exp() * (hi - lo).exp_m1()
            }
        }
    })
}

/// The cdf with the register value treated as a real variable, as in the
/// tail analysis: `(1 - 1/(m 2^x))^n`.
pub fn pr_register_leq_continuous<F: Scalar>(m: u64, n: u64, x: F) -> Result<F> {
    check_domain(m, 0)?;
    Ok(log_cdf(m, n, x).exp())
}

fn centre<F: Scalar>(m: u64, n: u64) -> F {
    (F::from_u64(n).unwrap() / F::from_u64(m).unwrap()).log2()
}

/// Bounds `(lower, upper)` on `Pr[M[j] < B - delta]` and
/// `Pr[M[j] > B + delta]` where `B = log2(n/m)`. Requires `0 < delta < B`.
pub fn tail_bounds<F: Scalar>(m: u64, n: u64, delta: F) -> Result<(F, F)> {
    check_domain(m, 0)?;
    let b = centre::<F>(m, n);
    if !(delta > F::zero() && delta < b) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, log2(n/m)) = (0, {b:?}), got {delta:?}"
        )));
    }
    let two = F::c(2.0);
    Ok(((-two.powf(delta)).exp(), two.powf(-delta)))
}

/// The tails bounded by [`tail_bounds`], from the continuous cdf.
pub fn exact_tails<F: Scalar>(m: u64, n: u64, delta: F) -> Result<(F, F)> {
    tail_bounds::<F>(m, n, delta)?;
    let b = centre::<F>(m, n);
    let below = pr_register_leq_continuous(m, n, b - delta)?;
    let above = -log_cdf(m, n, b + delta).exp_m1();
    Ok((below, above))
}

/// Expected number of sparse registers for base `base` and `kappa`-bit
/// offsets, treating registers as independent.
pub fn expected_sparse_count<F: Scalar>(m: u64, n: u64, base: u8, kappa: u8) -> Result<F> {
    check_domain(m, base)?;
    if !(1..=6).contains(&kappa) {
        return Err(Error::InvalidArgument(format!(
            "kappa must be in 1..=6, got {kappa}"
        )));
    }
    let top = base as u32 + (1u32 << kappa);
    let mut outside = F::zero();
    for k in (0..=MAX_RANK).filter(|&k| k < base || k as u32 >= top) {
        outside = outside + pr_register_eq::<F>(m, n, k)?;
    }
    Ok(F::from_u64(m).unwrap() * outside)
}

/// Shannon entropy, in bits, of one register's value.
pub fn register_entropy<F: Scalar>(m: u64, n: u64) -> Result<F> {
    Ok(RegisterDistribution::<F>::new(m, n)?.entropy())
}

/// The full pmf of one register.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterDistribution<F> {
    pub m: u64,
    pub n: u64,
    pmf: Vec<F>,
}

impl<F: Scalar> RegisterDistribution<F> {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        let pmf = (0..=MAX_RANK)
            .map(|k| pr_register_eq::<F>(m, n, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, n, pmf })
    }

    pub fn pmf(&self) -> &[F] {
        &self.pmf
    }

    pub fn cdf(&self, k: u8) -> F {
        pr_register_leq(self.m, self.n, k).unwrap_or(F::one())
    }

    pub fn mean(&self) -> F {
        self.pmf.iter().enumerate().fold(F::zero(), |acc, (k, &p)| {
            acc + F::from_usize(k).unwrap() * p
        })
    }

    pub fn entropy(&self) -> F {
        self.pmf
            .iter()
            .filter(|&&p| p > F::zero())
            .fold(F::zero(), |acc, &p| acc - p * p.log2())
    }

    /// Base in `[0, 63]` minimising [`expected_sparse_count`].
    pub fn best_base(&self, kappa: u8) -> Result<u8> {
        let mut best = (0u8, F::infinity());
        for b in 0..=MAX_RANK {
            let s = expected_sparse_count::<F>(self.m, self.n, b, kappa)?;
            if s < best.1 {
                best = (b, s);
            }
        }
        Ok(best.0)
    }
}

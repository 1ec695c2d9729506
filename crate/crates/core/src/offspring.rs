//! Offspring distributions for the branching process.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::float;

/// Mass below which analytically infinite pmfs are truncated. The removed
/// tail is folded into the largest retained atom so the stored pmf sums to
/// 1 exactly up to rounding.
pub const TRUNCATION_THRESHOLD: f64 = 1e-15;

/// Tolerance on the total mass of a user-supplied pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfError {
    /// Negative mass, empty support, or total mass off by more than the
    /// tolerance.
    InvalidPmf,
}

impl fmt::Display for PmfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid probability mass function")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PmfError {}

/// Distribution of the offspring count, with cached moments.
///
/// The central limit theorem setting requires criticality (mean 1) and
/// finite nonzero variance; distributions violating those are still usable
/// but carry warning flags.
#[derive(Debug, Clone)]
pub struct OffspringDistribution {
    pmf: Vec<f64>,
    mean: f64,
    variance: f64,
    name: String,
    warn_mean: bool,
    warn_variance: bool,
}

impl OffspringDistribution {
    /// Geometric offspring, P(xi = k) = 2^-(k+1): uniform plane trees.
    pub fn geometric_half() -> OffspringDistribution {
        let mut pmf = Vec::new();
        let mut p = 0.5;
        while p >= TRUNCATION_THRESHOLD {
            pmf.push(p);
            p *= 0.5;
        }
        Self::from_truncated_pmf(pmf, "geometric-1/2")
    }

    /// Poisson offspring with mean 1: uniform rooted labelled trees.
    pub fn poisson_one() -> OffspringDistribution {
        let mut pmf = Vec::new();
        let mut p = float::exp(-1.0);
        let mut k = 1.0;
        while p >= TRUNCATION_THRESHOLD {
            pmf.push(p);
            p /= k;
            k += 1.0;
        }
        Self::from_truncated_pmf(pmf, "poisson-1")
    }

    /// P(xi = 0) = P(xi = 2) = 1/2: uniform binary trees (odd sizes only).
    pub fn binary_half() -> OffspringDistribution {
        Self::from_truncated_pmf(alloc::vec![0.5, 0.0, 0.5], "binary-half")
    }

    /// Validates and caches a custom pmf.
    pub fn custom(pmf: &[f64]) -> Result<OffspringDistribution, PmfError> {
        if pmf.is_empty() || pmf.iter().any(|&p| !(p >= 0.0) || p > 1.0) {
            return Err(PmfError::InvalidPmf);
        }
        let total: f64 = pmf.iter().sum();
        if !(total >= 1.0 - MASS_TOLERANCE && total <= 1.0 + MASS_TOLERANCE) {
            return Err(PmfError::InvalidPmf);
        }
        Ok(Self::finish(pmf.to_vec(), String::from("custom")))
    }

    /// Folds the truncated tail into the last retained atom, leaving the
    /// head probabilities untouched.
    fn from_truncated_pmf(mut pmf: Vec<f64>, name: &str) -> OffspringDistribution {
        let total: f64 = pmf.iter().sum();
        let residual = 1.0 - total;
        *pmf.last_mut().unwrap() += residual;
        Self::finish(pmf, String::from(name))
    }

    fn finish(mut pmf: Vec<f64>, name: String) -> OffspringDistribution {
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let mean: f64 = pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum();
        let m2: f64 = pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64) * (k as f64) * p)
            .sum();
        let variance = m2 - mean * mean;
        let warn_mean = float::abs(mean - 1.0) > 1e-9;
        let warn_variance = !(variance > 0.0) || !variance.is_finite();
        OffspringDistribution {
            pmf,
            mean,
            variance,
            name,
            warn_mean,
            warn_variance,
        }
    }

    #[inline]
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// P(xi = k), zero beyond the stored support.
    #[inline]
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn max_support(&self) -> usize {
        self.pmf.len() - 1
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    #[inline]
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// E xi^r.
    pub fn moment(&self, r: u32) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| float::powi(k as f64, r as i32) * p)
            .sum()
    }

    #[inline]
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Set if the mean deviates from the critical value 1.
    #[inline]
    pub fn warn_mean(&self) -> bool {
        self.warn_mean
    }

    /// Set if the variance is zero or non-finite.
    #[inline]
    pub fn warn_variance(&self) -> bool {
        self.warn_variance
    }

    /// gcd of the nonzero support values; 0 when the support is {0}.
    pub fn support_gcd(&self) -> usize {
        let mut g = 0usize;
        for (k, &p) in self.pmf.iter().enumerate() {
            if k > 0 && p > 0.0 {
                g = gcd(g, k);
            }
        }
        g
    }

    /// Inverse-cdf draw from a uniform in [0, 1). The expected number of
    /// scan steps is 1 + mean.
    #[inline]
    pub fn draw(&self, u: f64) -> u32 {
        let mut k = 0usize;
        let last = self.pmf.len() - 1;
        let mut acc = u;
        while k < last {
            acc -= self.pmf[k];
            if acc < 0.0 {
                return k as u32;
            }
            k += 1;
        }
        last as u32
    }

    /// The size-biased companion distribution.
    pub fn size_biased(&self) -> SizeBiasedOffspring {
        SizeBiasedOffspring::new(self)
    }
}

/// Size-biased offspring, P(k) = k * p_k (well defined when the mean is 1;
/// normalised by the mean otherwise).
#[derive(Debug, Clone)]
pub struct SizeBiasedOffspring {
    pmf: Vec<f64>,
}

impl SizeBiasedOffspring {
    pub fn new(dist: &OffspringDistribution) -> SizeBiasedOffspring {
        let mean = dist.mean();
        let pmf: Vec<f64> = dist
            .pmf()
            .iter()
            .enumerate()
            .map(|(k, &p)| k as f64 * p / mean)
            .collect();
        SizeBiasedOffspring { pmf }
    }

    #[inline]
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    #[inline]
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// Inverse-cdf draw; the result is always at least 1.
    #[inline]
    pub fn draw(&self, u: f64) -> u32 {
        let mut k = 1usize;
        let last = self.pmf.len() - 1;
        let mut acc = u;
        while k < last {
            acc -= self.pmf[k];
            if acc < 0.0 {
                return k as u32;
            }
            k += 1;
        }
        last as u32
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

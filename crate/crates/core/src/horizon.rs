//! Episode-length distributions: the survival↔pmf duality and seeded sampling.

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Hard ceiling on the precomputed support (safety valve for heavy tails).
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
/// Support is extended until the cumulative mass reaches 1 − this threshold.
const MASS_TOLERANCE: f64 = 1e-12;

/// A distribution over episode lengths H ≥ 1, stored through its survival
/// function P(H ≥ h). Sampling is inverse-CDF on the survival representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonDistribution {
    /// survival[i] = P(H ≥ i+1); survival[0] = 1.
    survival: Vec<f64>,
    /// Mass beyond the precomputed support (positive only when the cap was hit).
    residual: f64,
}

/// One draw of an episode length, with a flag for cap truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthSample {
    pub length: usize,
    pub capped: bool,
}

impl HorizonDistribution {
    /// Builds the dual distribution of a survival curve: pmf(h) = γ(h) − γ(h+1).
    pub fn from_curve(curve: &DiscountCurve) -> Result<Self> {
        Self::from_curve_capped(curve, DEFAULT_SUPPORT_CAP)
    }

    pub fn from_curve_capped(curve: &DiscountCurve, cap: usize) -> Result<Self> {
        if !curve.is_survival() {
            return Err(Error::NotSurvival("curve is not non-increasing".into()));
        }
        if (curve.gamma(1) - 1.0).abs() > 1e-12 {
            return Err(Error::NotSurvival("survival must start at 1".into()));
        }
        let cap = cap.max(1);
        let mut survival = vec![1.0];
        let mut h = 1usize;
        let mut residual = 0.0;
        loop {
            let next = curve.gamma(h + 1);
            if next <= MASS_TOLERANCE {
                break;
            }
            if h >= cap {
                residual = next;
                break;
            }
            survival.push(next);
            h += 1;
        }
        Ok(HorizonDistribution { survival, residual })
    }

    /// Builds directly from a pmf over {1, …, len}.
    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Domain("empty pmf".into()));
        }
        if pmf.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::Domain("pmf entries must be nonnegative".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("pmf sums to {total}, expected 1")));
        }
        let mut survival = vec![0.0; pmf.len()];
        let mut acc = 0.0;
        for i in (0..pmf.len()).rev() {
            acc += pmf[i];
            survival[i] = acc;
        }
        survival[0] = 1.0;
        Ok(HorizonDistribution { survival, residual: 0.0 })
    }

    pub fn point_mass(h: usize) -> Self {
        assert!(h >= 1);
        HorizonDistribution { survival: vec![1.0; h], residual: 0.0 }
    }

    /// P(H ≥ h).
    pub fn survival(&self, h: usize) -> f64 {
        assert!(h >= 1);
        if h <= self.survival.len() {
            self.survival[h - 1]
        } else {
            self.residual
        }
    }

    /// P(H = h) over the realized support.
    pub fn pmf(&self, h: usize) -> f64 {
        self.survival(h) - self.survival(h + 1)
    }

    /// Largest h in the precomputed support.
    pub fn max_support(&self) -> usize {
        self.survival.len()
    }

    /// True when mass beyond the support cap was truncated.
    pub fn truncated(&self) -> bool {
        self.residual > 0.0
    }

    /// E[H] restricted to the realized support (= Σ_h P(H ≥ h)).
    pub fn mean(&self) -> f64 {
        self.survival.iter().sum()
    }

    /// The dual discount curve γ(h) = P(H ≥ h).
    pub fn to_curve(&self) -> Result<DiscountCurve> {
        DiscountCurve::empirical(self.survival.clone())
    }

    /// H = min{h ≥ 1 : F(h) ≥ u} for u ∈ (0, 1]; expressed through the survival
    /// function as the count of indices with P(H ≥ h) > 1 − u.
    pub fn inverse_cdf(&self, u: f64) -> LengthSample {
        let v = 1.0 - u;
        let h = self.survival.partition_point(|&s| s > v).max(1);
        let capped = h == self.survival.len() && self.residual > v;
        LengthSample { length: h, capped }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LengthSample {
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        self.inverse_cdf(u)
    }

    pub fn sample_length<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample(rng).length
    }
}

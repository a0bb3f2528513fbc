//! Discount curves γ(h), tail sums Γ(h), effective horizons N(Δ), and the t(h) diagnostic.
//!
//! A curve is a summable sequence γ(1), γ(2), … with γ(1) = 1. Curves double as
//! survival functions of episode-length distributions (γ(h) = P(H ≥ h)).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Number of terms summed directly before switching to the Euler-Maclaurin
/// remainder for polynomial tails. Large enough that the remainder estimate
/// is accurate to well below 1e-12 for any p > 1.05.
const POLY_DIRECT_TERMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveKind {
    Geometric { params: GeometricParams },
    Polynomial { params: PolynomialParams },
    QuasiHyperbolic { params: QuasiHyperbolicParams },
    Custom { values: Vec<f64> },
    Empirical { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricParams {
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialParams {
    pub p: f64,
    #[serde(default)]
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiHyperbolicParams {
    pub beta: f64,
    pub gamma: f64,
}

/// A discount curve with closed-form or cached tail sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveKind", into = "CurveKind")]
pub struct DiscountCurve {
    kind: CurveKind,
    /// Suffix sums for finite-support kinds: tails[i] = Γ(i+1). Empty for parametric kinds.
    tails: Vec<f64>,
}

impl TryFrom<CurveKind> for DiscountCurve {
    type Error = Error;
    fn try_from(kind: CurveKind) -> Result<Self> {
        DiscountCurve::new(kind)
    }
}

impl From<DiscountCurve> for CurveKind {
    fn from(c: DiscountCurve) -> CurveKind {
        c.kind
    }
}

impl DiscountCurve {
    pub fn new(kind: CurveKind) -> Result<Self> {
        let mut tails = Vec::new();
        match &kind {
            CurveKind::Geometric { params } => {
                if !(0.0..1.0).contains(&params.gamma) {
                    return Err(Error::NonSummable(format!(
                        "geometric factor must lie in [0,1), got {}",
                        params.gamma
                    )));
                }
            }
            CurveKind::Polynomial { params } => {
                if params.p <= 1.0 {
                    return Err(Error::NonSummable(format!(
                        "polynomial exponent must exceed 1 for a summable tail, got {}",
                        params.p
                    )));
                }
            }
            CurveKind::QuasiHyperbolic { params } => {
                if !(0.0..=1.0).contains(&params.beta) || !(0.0..1.0).contains(&params.gamma) {
                    return Err(Error::NonSummable(format!(
                        "quasi-hyperbolic needs beta in [0,1] and gamma in [0,1), got ({}, {})",
                        params.beta, params.gamma
                    )));
                }
            }
            CurveKind::Custom { values } | CurveKind::Empirical { values } => {
                if values.is_empty() {
                    return Err(Error::Domain("curve needs at least one value".into()));
                }
                if (values[0] - 1.0).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "curve must start at gamma(1) = 1, got {}",
                        values[0]
                    )));
                }
                if values.iter().any(|&v| !(0.0..=1.0).contains(&v) || !v.is_finite()) {
                    return Err(Error::Domain("curve values must lie in [0,1]".into()));
                }
                // Exact backward suffix sums so Γ(h) − Γ(h+1) = γ(h) holds bitwise.
                tails = vec![0.0; values.len() + 1];
                for i in (0..values.len()).rev() {
                    tails[i] = values[i] + tails[i + 1];
                }
                tails.pop();
            }
        }
        Ok(DiscountCurve { kind, tails })
    }

    pub fn geometric(gamma: f64) -> Result<Self> {
        Self::new(CurveKind::Geometric { params: GeometricParams { gamma } })
    }

    pub fn polynomial(p: f64, offset: usize) -> Result<Self> {
        Self::new(CurveKind::Polynomial { params: PolynomialParams { p, offset } })
    }

    pub fn quasi_hyperbolic(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(CurveKind::QuasiHyperbolic { params: QuasiHyperbolicParams { beta, gamma } })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        Self::new(CurveKind::Custom { values })
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Self::new(CurveKind::Empirical { values })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// γ(h) for h ≥ 1.
    pub fn gamma(&self, h: usize) -> f64 {
        assert!(h >= 1, "discount index starts at 1");
        match &self.kind {
            CurveKind::Geometric { params } => params.gamma.powi(h as i32 - 1),
            CurveKind::Polynomial { params } => {
                if h <= params.offset + 1 {
                    1.0
                } else {
                    ((h - params.offset) as f64).powf(-params.p)
                }
            }
            CurveKind::QuasiHyperbolic { params } => {
                if h == 1 {
                    1.0
                } else {
                    params.beta * params.gamma.powi(h as i32 - 1)
                }
            }
            CurveKind::Custom { values } | CurveKind::Empirical { values } => {
                values.get(h - 1).copied().unwrap_or(0.0)
            }
        }
    }

    /// Γ(h) = Σ_{j ≥ h} γ(j).
    pub fn tail_sum(&self, h: usize) -> f64 {
        assert!(h >= 1, "discount index starts at 1");
        match &self.kind {
            CurveKind::Geometric { params } => {
                params.gamma.powi(h as i32 - 1) / (1.0 - params.gamma)
            }
            CurveKind::Polynomial { params } => {
                let ones = (params.offset + 1).saturating_sub(h - 1) as f64;
                let m = (h.saturating_sub(params.offset)).max(2);
                ones + zeta_tail(params.p, m)
            }
            CurveKind::QuasiHyperbolic { params } => {
                let g = params.gamma;
                let geo_tail = |k: usize| g.powi(k as i32 - 1) / (1.0 - g);
                if h == 1 {
                    1.0 + params.beta * (geo_tail(2))
                } else {
                    params.beta * geo_tail(h)
                }
            }
            CurveKind::Custom { .. } | CurveKind::Empirical { .. } => {
                self.tails.get(h - 1).copied().unwrap_or(0.0)
            }
        }
    }

    /// Total mass Γ(1); for survival curves this is E[H].
    pub fn total(&self) -> f64 {
        self.tail_sum(1)
    }

    /// Last index h with γ(h) > 0, or `None` for curves with infinite support.
    pub fn last_positive(&self) -> Option<usize> {
        match &self.kind {
            CurveKind::Geometric { params } => (params.gamma == 0.0).then_some(1),
            CurveKind::Polynomial { .. } => None,
            CurveKind::QuasiHyperbolic { params } => {
                (params.beta == 0.0 || params.gamma == 0.0).then_some(1)
            }
            CurveKind::Custom { values } | CurveKind::Empirical { values } => {
                values.iter().rposition(|&v| v > 0.0).map(|i| i + 1)
            }
        }
    }

    /// Whether the curve is a valid survival function: non-increasing with γ(1) = 1.
    pub fn is_survival(&self) -> bool {
        match &self.kind {
            CurveKind::Geometric { .. }
            | CurveKind::Polynomial { .. }
            | CurveKind::QuasiHyperbolic { .. } => true,
            CurveKind::Custom { values } | CurveKind::Empirical { values } => {
                values.windows(2).all(|w| w[0] >= w[1] - 1e-15)
            }
        }
    }

    /// γ(h+1)/γ(h), the backward-induction multiplier at layer h.
    pub fn shifted_ratio(&self, h: usize) -> Result<f64> {
        let g = self.gamma(h);
        if g <= 0.0 {
            return Err(Error::DegenerateLayer(format!("gamma({h}) = 0")));
        }
        Ok(self.gamma(h + 1) / g)
    }

    /// Minimal h with Γ(h) ≤ delta.
    pub fn effective_horizon(&self, delta: f64) -> Result<EffectiveHorizon> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        if self.tail_sum(1) <= delta {
            return Ok(EffectiveHorizon { n_delta: 1, delta });
        }
        // Exponential bracket then binary search on the non-increasing Γ.
        let mut hi = 2usize;
        while self.tail_sum(hi) > delta {
            hi = hi.checked_mul(2).ok_or_else(|| {
                Error::Domain("effective horizon overflow while bracketing".into())
            })?;
        }
        let mut lo = hi / 2; // Γ(lo) > delta
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.tail_sum(mid) > delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(EffectiveHorizon { n_delta: hi, delta })
    }

    /// t(h) = γ(h)/γ(1) · ∏_{j=2}^{h} (1 + γ(j)/(j^β Γ(j))); t(1) = 1.
    pub fn t_function(&self, beta: f64, h: usize) -> Result<f64> {
        Ok(self.gamma(h) * self.t_over_gamma(beta, h)?)
    }

    /// t(h)/γ(h), the bare product; avoids 0/0 at zero-tail layers.
    pub fn t_over_gamma(&self, beta: f64, h: usize) -> Result<f64> {
        assert!(h >= 1);
        let mut prod = 1.0;
        for j in 2..=h {
            let g = self.gamma(j);
            if g == 0.0 {
                continue;
            }
            let tail = self.tail_sum(j);
            if tail <= 0.0 {
                return Err(Error::DegenerateLayer(format!("Gamma({j}) = 0 inside t(h)")));
            }
            prod *= 1.0 + g / ((j as f64).powf(beta) * tail);
        }
        Ok(prod)
    }

    /// Parameter recipe (β, Δ) for a horizon budget of T episodes.
    pub fn recommended_params(&self, t: usize) -> (f64, f64) {
        let t = t.max(1) as f64;
        match &self.kind {
            CurveKind::Geometric { params } => (1.5, 1.0 / (t * (1.0 - params.gamma))),
            CurveKind::QuasiHyperbolic { params } => (1.5, 1.0 / (t * (1.0 - params.gamma))),
            CurveKind::Polynomial { params } => {
                let p = params.p;
                let beta = p - 1.0;
                let delta = t.powf(-(p - 1.0) / (2.0 * p - 1.0))
                    * (p - 1.0).powf(-1.0 / (2.0 * p - 1.0));
                (beta, delta)
            }
            CurveKind::Custom { .. } | CurveKind::Empirical { .. } => (1.5, 1.0 / t),
        }
    }

    /// Numeric evaluation of each additive term of the formal regret bound,
    /// with all absolute constants set to 1 (diagnostic only, not certified).
    pub fn theorem1_diagnostic(
        &self,
        beta: f64,
        delta: f64,
        s: usize,
        a: usize,
        t: usize,
    ) -> Result<BoundTerms> {
        let n = self.effective_horizon(delta)?.n_delta;
        if t == 0 {
            return Ok(BoundTerms { n_delta: n, truncation: 0.0, martingale: 0.0, bonus: 0.0, lower_order: 0.0 });
        }
        let tf = t as f64;
        let log_factor = ((s * a * t * n) as f64).max(3.0).ln();
        let truncation = delta * tf * self.t_over_gamma(beta, n + 1)?;
        let mut martingale: f64 = 0.0;
        let mut bonus: f64 = 0.0;
        let mut lower_order: f64 = 0.0;
        for h in 1..=n {
            let g = self.gamma(h);
            if g == 0.0 {
                continue;
            }
            let th = self.t_function(beta, h)?;
            let gn = self.gamma(h + 1);
            let tail = self.tail_sum(h + 1);
            martingale = martingale.max(th * gn / g);
            bonus = bonus.max(th * tail / g);
            if gn > 0.0 {
                lower_order = lower_order.max(th * tail * tail / (g * gn));
            }
        }
        let nf = n as f64;
        Ok(BoundTerms {
            n_delta: n,
            truncation,
            martingale: martingale * (tf * nf * log_factor).sqrt(),
            bonus: bonus * ((s * a) as f64 * tf * nf * log_factor).sqrt(),
            lower_order: lower_order * (s * s * a) as f64 * nf.powf(beta) * log_factor,
        })
    }
}

/// Σ_{k ≥ m} k^{-p} via direct summation plus an Euler-Maclaurin remainder.
fn zeta_tail(p: f64, m: usize) -> f64 {
    let cutoff = m + POLY_DIRECT_TERMS;
    let mut sum = 0.0;
    for k in (m..cutoff).rev() {
        sum += (k as f64).powf(-p);
    }
    let c = cutoff as f64;
    sum + c.powf(1.0 - p) / (p - 1.0) + c.powf(-p) / 2.0 + p * c.powf(-p - 1.0) / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHorizon {
    pub n_delta: usize,
    pub delta: f64,
}

/// Additive terms of the formal regret bound, constants fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub n_delta: usize,
    pub truncation: f64,
    pub martingale: f64,
    pub bonus: f64,
    pub lower_order: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.truncation + self.martingale + self.bonus + self.lower_order
    }
}

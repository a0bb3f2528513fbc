//! Unknown-distribution estimation: doubling blocks, empirical survival
//! curves, tail-sum estimates, and the block-restarting learner.

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::horizon::HorizonDistribution;
use crate::mdp::{StartStates, TabularMdp};
use crate::trace::{RegretMode, RegretTrace};
use crate::ucbvi::{build_eval_oracle, draw_schedule, run_schedule, AgentOptions, AgentState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Doubling block lengths B, 2B, 4B, … truncated to sum to T.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub b: usize,
    pub block_lengths: Vec<usize>,
}

/// B = ceil(√T · ln T · ln(ln(max(T,3))/δ)) clamped to [1, T].
pub fn block_schedule(t: usize, delta: f64) -> BlockSchedule {
    if t == 0 {
        return BlockSchedule { b: 1, block_lengths: Vec::new() };
    }
    let tf = t as f64;
    let raw = tf.sqrt() * tf.ln() * ((tf.max(3.0)).ln() / delta).ln();
    let b = (raw.ceil() as usize).clamp(1, t);
    let mut block_lengths = Vec::new();
    let mut remaining = t;
    let mut len = b;
    while remaining > 0 {
        let take = len.min(remaining);
        block_lengths.push(take);
        remaining -= take;
        len = len.saturating_mul(2);
    }
    BlockSchedule { b, block_lengths }
}

/// Exact-count empirical distribution of observed episode lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalSurvival {
    /// tail_counts[h-1] = #{ H_i ≥ h } for h = 1..=max observation.
    tail_counts: Vec<u64>,
    n: u64,
}

pub fn empirical_survival(samples: &[usize]) -> Result<EmpiricalSurvival> {
    if samples.is_empty() {
        return Err(Error::Estimation("no observed lengths".into()));
    }
    if samples.iter().any(|&h| h == 0) {
        return Err(Error::Estimation("episode lengths must be ≥ 1".into()));
    }
    let max_h = *samples.iter().max().unwrap();
    let mut pmf_counts = vec![0u64; max_h];
    for &h in samples {
        pmf_counts[h - 1] += 1;
    }
    let mut tail_counts = vec![0u64; max_h];
    let mut acc = 0u64;
    for h in (1..=max_h).rev() {
        acc += pmf_counts[h - 1];
        tail_counts[h - 1] = acc;
    }
    Ok(EmpiricalSurvival { tail_counts, n: samples.len() as u64 })
}

impl EmpiricalSurvival {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn max_observed(&self) -> usize {
        self.tail_counts.len()
    }

    /// γ̂(h) = #{H_i ≥ h}/n = 1 − F̂(h−1).
    pub fn survival_hat(&self, h: usize) -> f64 {
        assert!(h >= 1);
        self.tail_counts.get(h - 1).map_or(0.0, |&c| c as f64 / self.n as f64)
    }

    /// F̂(h) = #{H_i ≤ h}/n.
    pub fn ecdf(&self, h: usize) -> f64 {
        1.0 - self.survival_hat(h + 1)
    }

    /// Γ̂(h) = Σ_{j ≥ h} γ̂(j), summed over the finite support.
    pub fn tail_sum_hat(&self, h: usize) -> f64 {
        assert!(h >= 1);
        let total: u64 = self.tail_counts.iter().skip(h - 1).sum();
        total as f64 / self.n as f64
    }

    /// The hinge-average form of the same quantity: (1/n) Σ_i max(0, H_i − h + 1).
    /// Agrees exactly with `tail_sum_hat` (both are the same integer over n).
    pub fn tail_sum_hat_hinge(&self, h: usize, samples: &[usize]) -> f64 {
        let total: u64 = samples.iter().map(|&hi| (hi + 1).saturating_sub(h) as u64).sum();
        total as f64 / self.n as f64
    }

    /// The estimated curve γ̂: always a valid survival function (γ̂(1) = 1).
    pub fn to_curve(&self) -> Result<DiscountCurve> {
        let values: Vec<f64> = (1..=self.max_observed()).map(|h| self.survival_hat(h)).collect();
        DiscountCurve::empirical(values)
    }
}

/// DKW sup-norm band for the ecdf/survival estimate: √(ln(2/δ)/(2n)).
pub fn dkw_band(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// The stated tail-sum error bound over h ≤ D: √((ln D + ln(1/δ))/n).
pub fn tail_sum_bound(d: usize, n: usize, delta: f64) -> f64 {
    (((d as f64).ln() + (1.0 / delta).ln()) / n as f64).sqrt()
}

/// Default prior curve for block 0: geometric 0.5 truncated at H*.
pub fn default_prior_curve(h_star: usize) -> DiscountCurve {
    let values: Vec<f64> = (0..h_star).map(|i| 0.5f64.powi(i as i32)).collect();
    DiscountCurve::custom(values).expect("truncated geometric prior is valid")
}

#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Block-0 curve; defaults to geometric 0.5 truncated at H*.
    pub prior: Option<DiscountCurve>,
    /// Fresh transition counts at every block instead of carrying them over.
    pub reset_counts_per_block: bool,
    pub agent: AgentOptions,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { prior: None, reset_counts_per_block: false, agent: AgentOptions::default() }
    }
}

/// Runs the block-restarting learner: block j re-initializes the agent with the
/// curve estimated from all previously observed lengths (block 0 uses the
/// prior) and Δ̂_j = Γ̂_j(H*+1); the layer budget is pinned to H*.
pub fn run_estimating_learner<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    dist: &HorizonDistribution,
    h_star: usize,
    confidence: f64,
    episodes: usize,
    start: &StartStates,
    opts: &EstimatorOptions,
    mode: RegretMode,
    rng: &mut R,
) -> Result<RegretTrace> {
    if h_star == 0 {
        return Err(Error::Domain("H* must be at least 1".into()));
    }
    mdp.validate()?;
    let schedule = draw_schedule(mdp, dist, start, episodes, rng);
    let h_max = schedule.iter().map(|&(_, h)| h).max().unwrap_or(0);
    let eval_curve = dist.to_curve()?;
    let oracle = build_eval_oracle(mdp, mode, &eval_curve, h_max)?;
    let eval = oracle.as_eval(&eval_curve);
    let blocks = block_schedule(episodes, confidence);

    let dims = (mdp.num_states, mdp.num_actions);
    let mut trace = RegretTrace::new();
    let mut observed: Vec<usize> = Vec::new();
    let mut prev_agent: Option<AgentState> = None;
    let mut offset = 0usize;

    for (j, &len) in blocks.block_lengths.iter().enumerate() {
        let curve = if j == 0 {
            opts.prior.clone().unwrap_or_else(|| default_prior_curve(h_star))
        } else {
            empirical_survival(&observed)?.to_curve()?
        };
        let delta_hat = curve.tail_sum(h_star + 1);
        let mut agent = AgentState::init_with_layers(
            dims,
            &curve,
            h_star,
            delta_hat.max(f64::MIN_POSITIVE),
            confidence,
            episodes,
            opts.agent,
        )?;
        if let (Some(prev), false) = (&prev_agent, opts.reset_counts_per_block) {
            agent.adopt_counts(prev);
        }
        let slice = &schedule[offset..offset + len];
        run_schedule(mdp, &mut agent, slice, &eval, 0, offset, Some(j), &mut trace, rng);
        observed.extend(slice.iter().map(|&(_, h)| h));
        offset += len;
        prev_agent = Some(agent);
    }
    Ok(trace)
}

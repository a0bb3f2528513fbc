//! Exact planning and policy evaluation used as ground truth: finite-horizon and
//! general-discounted backward induction, the mixed-horizon policy apparatus,
//! and regret computation in both realized and discounted form.

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::trace::RegretTrace;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A step-indexed deterministic policy: layers for h = 1..=layers.len(),
/// then the tail table for every later step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonStationaryPolicy {
    pub layers: Vec<Vec<usize>>,
    pub tail: Vec<usize>,
}

impl NonStationaryPolicy {
    pub fn action(&self, h: usize, s: usize) -> usize {
        assert!(h >= 1);
        if h <= self.layers.len() {
            self.layers[h - 1][s]
        } else {
            self.tail[s]
        }
    }

    /// A stationary policy from a single action table.
    pub fn stationary(actions: Vec<usize>) -> Self {
        NonStationaryPolicy { layers: Vec::new(), tail: actions }
    }
}

/// The objective a value table was computed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    Horizon(usize),
    Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub objective: Objective,
}

/// V*(s; H) for every horizon H = 0..=h_max in one backward pass.
#[derive(Debug, Clone)]
pub struct OptimalValues {
    by_horizon: Vec<Vec<f64>>,
}

impl OptimalValues {
    pub fn compute(mdp: &TabularMdp, h_max: usize) -> Self {
        let s_n = mdp.num_states;
        let mut by_horizon = Vec::with_capacity(h_max + 1);
        by_horizon.push(vec![0.0; s_n]);
        for rem in 1..=h_max {
            let prev = &by_horizon[rem - 1];
            let mut cur = vec![0.0; s_n];
            for s in 0..s_n {
                let mut best = f64::NEG_INFINITY;
                for a in 0..mdp.num_actions {
                    let mut q = mdp.reward[s][a];
                    for (s2, &p) in mdp.transition[s][a].iter().enumerate() {
                        if p > 0.0 {
                            q += p * prev[s2];
                        }
                    }
                    if q > best {
                        best = q;
                    }
                }
                cur[s] = best;
            }
            by_horizon.push(cur);
        }
        OptimalValues { by_horizon }
    }

    pub fn h_max(&self) -> usize {
        self.by_horizon.len() - 1
    }

    pub fn value(&self, horizon: usize, state: usize) -> f64 {
        self.by_horizon[horizon][state]
    }
}

fn greedy_layer(mdp: &TabularMdp, next: &[f64], ratio: f64) -> (Vec<f64>, Vec<usize>) {
    let mut values = vec![0.0; mdp.num_states];
    let mut actions = vec![0usize; mdp.num_states];
    for s in 0..mdp.num_states {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0usize;
        for a in 0..mdp.num_actions {
            let mut q = mdp.reward[s][a];
            if ratio > 0.0 {
                let mut ev = 0.0;
                for (s2, &p) in mdp.transition[s][a].iter().enumerate() {
                    if p > 0.0 {
                        ev += p * next[s2];
                    }
                }
                q += ratio * ev;
            }
            if q > best {
                best = q;
                best_a = a;
            }
        }
        values[s] = best;
        actions[s] = best_a;
    }
    (values, actions)
}

fn policy_layer(
    mdp: &TabularMdp,
    policy: &NonStationaryPolicy,
    h: usize,
    next: &[f64],
    ratio: f64,
) -> Vec<f64> {
    let mut values = vec![0.0; mdp.num_states];
    for s in 0..mdp.num_states {
        let a = policy.action(h, s);
        let mut q = mdp.reward[s][a];
        if ratio > 0.0 {
            let mut ev = 0.0;
            for (s2, &p) in mdp.transition[s][a].iter().enumerate() {
                if p > 0.0 {
                    ev += p * next[s2];
                }
            }
            q += ratio * ev;
        }
        values[s] = q;
    }
    values
}

/// Backward induction over H undiscounted layers; ties broken by lowest action index.
pub fn finite_horizon_optimal(mdp: &TabularMdp, horizon: usize) -> (ValueTable, NonStationaryPolicy) {
    assert!(horizon >= 1);
    let mut v = vec![0.0; mdp.num_states];
    let mut layers = vec![Vec::new(); horizon];
    for rem in 1..=horizon {
        let (values, actions) = greedy_layer(mdp, &v, 1.0);
        v = values;
        layers[horizon - rem] = actions;
    }
    let tail = layers.last().cloned().unwrap();
    (
        ValueTable { values: v, objective: Objective::Horizon(horizon) },
        NonStationaryPolicy { layers, tail },
    )
}

/// The number of layers actually carrying weight: min(L, last positive index).
fn live_layers(curve: &DiscountCurve, l: usize) -> usize {
    curve.last_positive().map_or(l, |lp| lp.min(l))
}

fn curve_ratio(curve: &DiscountCurve, h: usize) -> Result<f64> {
    let g = curve.gamma(h);
    if g <= 0.0 {
        return Err(Error::DegenerateLayer(format!(
            "gamma({h}) = 0 inside the live range; non-monotone custom curves are unsupported here"
        )));
    }
    Ok(curve.gamma(h + 1) / g)
}

/// Optimal values under the curve objective, truncated at L layers via the
/// shifted-discount recursion. Reported values undershoot V*(·;γ) by at most
/// the returned error bound Γ(L+1).
pub fn discounted_optimal(
    mdp: &TabularMdp,
    curve: &DiscountCurve,
    l: usize,
) -> Result<(ValueTable, NonStationaryPolicy, f64)> {
    assert!(l >= 1);
    let lp = live_layers(curve, l);
    let mut v = vec![0.0; mdp.num_states];
    let mut layers = vec![Vec::new(); lp];
    for h in (1..=lp).rev() {
        let ratio = curve_ratio(curve, h)?;
        let (values, actions) = greedy_layer(mdp, &v, ratio);
        v = values;
        layers[h - 1] = actions;
    }
    let tail = layers.last().cloned().unwrap_or_else(|| vec![0; mdp.num_states]);
    Ok((
        ValueTable { values: v, objective: Objective::Curve },
        NonStationaryPolicy { layers, tail },
        curve.tail_sum(l + 1),
    ))
}

/// Backward-induction evaluation of a fixed policy over H undiscounted layers.
pub fn evaluate_policy_finite(mdp: &TabularMdp, policy: &NonStationaryPolicy, horizon: usize) -> ValueTable {
    assert!(horizon >= 1);
    let mut v = vec![0.0; mdp.num_states];
    for h in (1..=horizon).rev() {
        v = policy_layer(mdp, policy, h, &v, 1.0);
    }
    ValueTable { values: v, objective: Objective::Horizon(horizon) }
}

/// Curve-objective evaluation of a fixed policy, truncated at L layers.
pub fn evaluate_policy_curve(
    mdp: &TabularMdp,
    policy: &NonStationaryPolicy,
    curve: &DiscountCurve,
    l: usize,
) -> Result<(ValueTable, f64)> {
    assert!(l >= 1);
    let lp = live_layers(curve, l);
    let mut v = vec![0.0; mdp.num_states];
    for h in (1..=lp).rev() {
        let ratio = curve_ratio(curve, h)?;
        v = policy_layer(mdp, policy, h, &v, ratio);
    }
    Ok((ValueTable { values: v, objective: Objective::Curve }, curve.tail_sum(l + 1)))
}

/// Forward evaluation of V^π(start; H) through the state distribution; fast for
/// a single start state (skips the full backward table).
pub fn policy_value_finite_at(
    mdp: &TabularMdp,
    policy: &NonStationaryPolicy,
    start: usize,
    horizon: usize,
) -> f64 {
    policy_value_weighted_at(mdp, policy, start, horizon, |_| 1.0)
}

/// Forward evaluation of V^π(start; γ) truncated at L: Σ_h γ(h) E[r_h].
pub fn policy_value_curve_at(
    mdp: &TabularMdp,
    policy: &NonStationaryPolicy,
    curve: &DiscountCurve,
    start: usize,
    l: usize,
) -> f64 {
    let lp = live_layers(curve, l);
    if lp == 0 {
        return 0.0;
    }
    policy_value_weighted_at(mdp, policy, start, lp, |h| curve.gamma(h))
}

fn policy_value_weighted_at<W: Fn(usize) -> f64>(
    mdp: &TabularMdp,
    policy: &NonStationaryPolicy,
    start: usize,
    horizon: usize,
    weight: W,
) -> f64 {
    let s_n = mdp.num_states;
    let mut dist = vec![0.0; s_n];
    dist[start] = 1.0;
    let mut total = 0.0;
    for h in 1..=horizon {
        let w = weight(h);
        let mut next = vec![0.0; s_n];
        for s in 0..s_n {
            let mass = dist[s];
            if mass <= 0.0 {
                continue;
            }
            if mdp.terminal[s] {
                next[s] += mass;
                continue;
            }
            let a = policy.action(h, s);
            total += w * mass * mdp.reward[s][a];
            for (s2, &p) in mdp.transition[s][a].iter().enumerate() {
                if p > 0.0 {
                    next[s2] += mass * p;
                }
            }
        }
        dist = next;
    }
    total
}

/// The π_∞ evaluation apparatus: at step h it mixes the per-horizon optimal
/// policies with conditional weights P(H = j)/P(H ≥ h) over j ≥ h.
#[derive(Debug, Clone)]
pub struct MixedHorizonPolicy {
    /// (horizon j, P(H = j)) over the finite support.
    support: Vec<(usize, f64)>,
    policies: BTreeMap<usize, NonStationaryPolicy>,
    pub l: usize,
}

/// Builds the mixture from per-horizon optimal policies covering the support.
pub fn mixed_horizon_policy(
    dist: &crate::horizon::HorizonDistribution,
    per_horizon_optima: &BTreeMap<usize, NonStationaryPolicy>,
    l: usize,
) -> Result<MixedHorizonPolicy> {
    if dist.survival(l + 1) > 1e-12 {
        return Err(Error::Coverage(format!(
            "distribution has mass beyond the truncation L = {l}"
        )));
    }
    let mut support = Vec::new();
    for h in 1..=l.min(dist.max_support()) {
        let p = dist.pmf(h);
        if p > 0.0 {
            if !per_horizon_optima.contains_key(&h) {
                return Err(Error::Coverage(format!("missing optimal policy for horizon {h}")));
            }
            support.push((h, p));
        }
    }
    Ok(MixedHorizonPolicy { support, policies: per_horizon_optima.clone(), l })
}

impl MixedHorizonPolicy {
    /// Conditional mixture weights at step h: (j, P(H = j)/P(H ≥ h)) for j ≥ h.
    pub fn weights(&self, h: usize) -> Vec<(usize, f64)> {
        let tail: f64 = self.support.iter().filter(|(j, _)| *j >= h).map(|(_, p)| p).sum();
        if tail <= 0.0 {
            return Vec::new();
        }
        self.support
            .iter()
            .filter(|(j, _)| *j >= h)
            .map(|&(j, p)| (j, p / tail))
            .collect()
    }

    /// Curve-objective value of the per-step-randomized mixture via layered DP.
    pub fn evaluate_curve(&self, mdp: &TabularMdp, curve: &DiscountCurve) -> Result<ValueTable> {
        let lp = live_layers(curve, self.l);
        let mut v = vec![0.0; mdp.num_states];
        for h in (1..=lp).rev() {
            let ratio = curve_ratio(curve, h)?;
            let weights = self.weights(h);
            let mut cur = vec![0.0; mdp.num_states];
            for s in 0..mdp.num_states {
                let mut val = 0.0;
                for &(j, w) in &weights {
                    let a = self.policies[&j].action(h, s);
                    let mut q = mdp.reward[s][a];
                    if ratio > 0.0 {
                        let mut ev = 0.0;
                        for (s2, &p) in mdp.transition[s][a].iter().enumerate() {
                            if p > 0.0 {
                                ev += p * v[s2];
                            }
                        }
                        q += ratio * ev;
                    }
                    val += w * q;
                }
                cur[s] = val;
            }
            v = cur;
        }
        Ok(ValueTable { values: v, objective: Objective::Curve })
    }
}

/// One realized episode for regret accounting.
#[derive(Debug, Clone, Copy)]
pub struct RealizedEpisode {
    pub start_state: usize,
    pub h_k: usize,
    pub learner_value: f64,
}

/// Realized regret: Σ_k V*(x_k; H_k) − V^{π_k}(x_k; H_k).
pub fn regret_realized(mdp: &TabularMdp, episodes: &[RealizedEpisode]) -> RegretTrace {
    let h_max = episodes.iter().map(|e| e.h_k).max().unwrap_or(0);
    let oracle = OptimalValues::compute(mdp, h_max);
    let mut trace = RegretTrace::new();
    for (k, e) in episodes.iter().enumerate() {
        let v_star = oracle.value(e.h_k, e.start_state);
        trace.push(0, k + 1, e.h_k, v_star, e.learner_value, None);
    }
    trace
}

/// Discounted regret: Σ_k V*(x_k; γ) − V^{π_k}(x_k; γ), both truncated at L.
pub fn regret_discounted(
    mdp: &TabularMdp,
    curve: &DiscountCurve,
    l: usize,
    episodes: &[(usize, &NonStationaryPolicy)],
) -> Result<RegretTrace> {
    let (v_star, _, _) = discounted_optimal(mdp, curve, l)?;
    let mut trace = RegretTrace::new();
    for (k, &(start, policy)) in episodes.iter().enumerate() {
        let v_pi = policy_value_curve_at(mdp, policy, curve, start, l);
        trace.push(0, k + 1, 0, v_star.values[start], v_pi, None);
    }
    Ok(trace)
}

/// Default evaluation truncation: effective horizon at Δ = 1e-6 · Γ(1).
pub fn default_truncation(curve: &DiscountCurve) -> Result<usize> {
    Ok(curve.effective_horizon(1e-6 * curve.total())?.n_delta)
}

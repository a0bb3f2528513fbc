//! Optimistic layered value iteration under a general discount curve, with the
//! per-episode Update-Q-values sweep and the episodic learning loop.

use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::horizon::HorizonDistribution;
use crate::mdp::{StartStates, TabularMdp};
use crate::oracle::{NonStationaryPolicy, OptimalValues};
use crate::trace::RegretTrace;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BonusForm {
    /// coef · ln(SATN/δ) / √N, with the log outside the root.
    #[default]
    AsDisplayed,
    /// coef · √(ln(SATN/δ) / N), the conventional form.
    SqrtLog,
}

/// Exploration-bonus rule applied at each layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BonusRule {
    /// Per-layer scale times a function of the log factor and the visit count.
    Scaled { coef: Vec<f64>, form: BonusForm },
    /// Empirical-variance Bernstein bonus for fixed-horizon baselines:
    /// √(c1·L·Var/N) + c2·H·L/N.
    Bernstein { horizon: f64, c1: f64, c2: f64 },
}

/// Layered optimistic Q-tables with visit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub num_states: usize,
    pub num_actions: usize,
    /// Number of live layers (N(Δ), possibly capped at the curve's last positive index).
    pub n_layers: usize,
    pub delta: f64,
    pub confidence: f64,
    pub episodes: usize,
    /// Fixed value of the (N(Δ)+1)-th layer: Δ/γ(N(Δ)+1), or 0 for zero tails.
    pub top_value: f64,
    /// ln(S·A·T·N(Δ)/δ).
    pub log_factor: f64,
    /// γ(h+1)/γ(h) per layer.
    pub ratio: Vec<f64>,
    /// Initialization caps Γ(h)/γ(h) per layer.
    pub init_cap: Vec<f64>,
    pub bonus_rule: BonusRule,
    pub update_unvisited: bool,
    /// q[h-1][s*A + a].
    pub q: Vec<Vec<f64>>,
    /// v[h-1][s] = max_a q[h-1][s*A + a].
    pub v: Vec<Vec<f64>>,
    pub count_sa: Vec<u64>,
    /// Sparse successor counts per (s,a), sorted by successor index.
    pub count_sas: Vec<Vec<(usize, u64)>>,
}

/// Options shared by the learner constructors.
#[derive(Debug, Clone, Copy, Default)]
pub struct AgentOptions {
    pub bonus_form: BonusForm,
    pub update_unvisited: bool,
}

impl AgentState {
    /// Algorithm-standard initialization: N(Δ) layers capped at Γ(h)/γ(h),
    /// layer N(Δ)+1 pinned at Δ/γ(N(Δ)+1).
    pub fn init(
        dims: (usize, usize),
        curve: &DiscountCurve,
        delta: f64,
        confidence: f64,
        episodes: usize,
        opts: AgentOptions,
    ) -> Result<Self> {
        if delta <= 0.0 || delta >= curve.total() {
            return Err(Error::Domain(format!(
                "delta must lie in (0, {}), got {delta}",
                curve.total()
            )));
        }
        let n = curve.effective_horizon(delta)?.n_delta;
        let n = curve.last_positive().map_or(n, |lp| n.min(lp));
        Self::init_with_layers(dims, curve, n, delta, confidence, episodes, opts)
    }

    /// Initialization with an externally chosen layer count (used by the
    /// estimating learner, which pins the layer budget to H*).
    pub fn init_with_layers(
        (s_n, a_n): (usize, usize),
        curve: &DiscountCurve,
        n_layers: usize,
        delta: f64,
        confidence: f64,
        episodes: usize,
        opts: AgentOptions,
    ) -> Result<Self> {
        if s_n == 0 || a_n == 0 || n_layers == 0 {
            return Err(Error::Domain("need positive dims and at least one layer".into()));
        }
        if !(0.0 < confidence && confidence < 1.0) {
            return Err(Error::Domain(format!("confidence must lie in (0,1), got {confidence}")));
        }
        let n = curve.last_positive().map_or(n_layers, |lp| n_layers.min(lp));
        let mut ratio = Vec::with_capacity(n);
        let mut init_cap = Vec::with_capacity(n);
        let mut coef = Vec::with_capacity(n);
        for h in 1..=n {
            let g = curve.gamma(h);
            debug_assert!(g > 0.0);
            ratio.push(curve.gamma(h + 1) / g);
            init_cap.push(curve.tail_sum(h) / g);
            coef.push(3.0 * curve.tail_sum(h + 1) / g);
        }
        let g_top = curve.gamma(n + 1);
        let top_value = if g_top > 0.0 { delta / g_top } else { 0.0 };
        let log_factor = ((s_n * a_n * episodes.max(1) * n) as f64 / confidence).max(1.0).ln();
        let q = init_cap.iter().map(|&cap| vec![cap; s_n * a_n]).collect();
        let v = init_cap.iter().map(|&cap| vec![cap; s_n]).collect();
        Ok(AgentState {
            num_states: s_n,
            num_actions: a_n,
            n_layers: n,
            delta,
            confidence,
            episodes,
            top_value,
            log_factor,
            ratio,
            init_cap,
            bonus_rule: BonusRule::Scaled { coef, form: opts.bonus_form },
            update_unvisited: opts.update_unvisited,
            q: q,
            v: v,
            count_sa: vec![0; s_n * a_n],
            count_sas: vec![Vec::new(); s_n * a_n],
        })
    }

    fn sa(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    /// Empirical transition row: counts ratio, or uniform when unvisited.
    pub fn empirical_kernel(&self, s: usize, a: usize) -> Vec<f64> {
        let idx = self.sa(s, a);
        let n = self.count_sa[idx];
        if n == 0 {
            return vec![1.0 / self.num_states as f64; self.num_states];
        }
        let mut row = vec![0.0; self.num_states];
        for &(s2, c) in &self.count_sas[idx] {
            row[s2] = c as f64 / n as f64;
        }
        row
    }

    /// Exploration bonus at layer h (1-based) for a pair visited `count` times.
    /// Only defined for Scaled rules; Bernstein bonuses are computed in-sweep.
    pub fn bonus(&self, h: usize, count: u64) -> f64 {
        assert!(count >= 1, "bonus undefined at zero visits");
        match &self.bonus_rule {
            BonusRule::Scaled { coef, form } => {
                let c = coef[h - 1];
                match form {
                    BonusForm::AsDisplayed => c * self.log_factor / (count as f64).sqrt(),
                    BonusForm::SqrtLog => c * (self.log_factor / count as f64).sqrt(),
                }
            }
            BonusRule::Bernstein { .. } => {
                panic!("Bernstein bonus depends on the value layer; computed inside the sweep")
            }
        }
    }

    fn bernstein_bonus(&self, horizon: f64, c1: f64, c2: f64, count: u64, mean: f64, mean_sq: f64) -> f64 {
        let var = (mean_sq - mean * mean).max(0.0);
        let n = count as f64;
        (c1 * self.log_factor * var / n).sqrt() + c2 * horizon * self.log_factor / n
    }

    /// One full backward sweep h = N(Δ)..1 over the current counts.
    /// Pairs with zero visits keep their optimistic values unless
    /// `update_unvisited` forces the literal uniform-kernel backup.
    pub fn update_q_values(&mut self, rewards: &[Vec<f64>]) {
        let (s_n, a_n) = (self.num_states, self.num_actions);
        for h in (1..=self.n_layers).rev() {
            let v_next: Vec<f64> = if h == self.n_layers {
                vec![self.top_value; s_n]
            } else {
                self.v[h].clone()
            };
            let mut q_h = std::mem::take(&mut self.q[h - 1]);
            for s in 0..s_n {
                for a in 0..a_n {
                    let idx = s * a_n + a;
                    let n = self.count_sa[idx];
                    let (mean, mean_sq);
                    if n > 0 {
                        let mut m = 0.0;
                        let mut m2 = 0.0;
                        for &(s2, c) in &self.count_sas[idx] {
                            let v2 = v_next[s2];
                            let w = c as f64 / n as f64;
                            m += w * v2;
                            m2 += w * v2 * v2;
                        }
                        mean = m;
                        mean_sq = m2;
                    } else if self.update_unvisited {
                        mean = v_next.iter().sum::<f64>() / s_n as f64;
                        mean_sq = v_next.iter().map(|x| x * x).sum::<f64>() / s_n as f64;
                    } else {
                        continue;
                    }
                    let eff_count = n.max(1);
                    let b = match &self.bonus_rule {
                        BonusRule::Scaled { coef, form } => {
                            let c = coef[h - 1];
                            match form {
                                BonusForm::AsDisplayed => {
                                    c * self.log_factor / (eff_count as f64).sqrt()
                                }
                                BonusForm::SqrtLog => {
                                    c * (self.log_factor / eff_count as f64).sqrt()
                                }
                            }
                        }
                        BonusRule::Bernstein { horizon, c1, c2 } => {
                            self.bernstein_bonus(*horizon, *c1, *c2, eff_count, mean, mean_sq)
                        }
                    };
                    let candidate = rewards[s][a] + self.ratio[h - 1] * mean + b;
                    if candidate < q_h[idx] {
                        q_h[idx] = candidate;
                    }
                }
            }
            for s in 0..s_n {
                let row = &q_h[s * a_n..(s + 1) * a_n];
                self.v[h - 1][s] = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            }
            self.q[h - 1] = q_h;
        }
    }

    /// Greedy action at layer min(h, N(Δ)); ties to the lowest index.
    pub fn act(&self, h: usize, s: usize) -> usize {
        let h = h.min(self.n_layers);
        let row = &self.q[h - 1][s * self.num_actions..(s + 1) * self.num_actions];
        let mut best = 0usize;
        for (a, &q) in row.iter().enumerate() {
            if q > row[best] {
                best = a;
            }
        }
        best
    }

    /// Records a transition; steps beyond the layer budget are dropped.
    pub fn observe(&mut self, h: usize, s: usize, a: usize, s_next: usize) {
        if h > self.n_layers {
            return;
        }
        let idx = self.sa(s, a);
        self.count_sa[idx] += 1;
        let row = &mut self.count_sas[idx];
        match row.binary_search_by_key(&s_next, |&(s2, _)| s2) {
            Ok(i) => row[i].1 += 1,
            Err(i) => row.insert(i, (s_next, 1)),
        }
    }

    /// Snapshot of the current greedy nonstationary policy.
    pub fn greedy_policy(&self) -> NonStationaryPolicy {
        let layers: Vec<Vec<usize>> = (1..=self.n_layers)
            .map(|h| (0..self.num_states).map(|s| self.act(h, s)).collect())
            .collect();
        let tail = layers.last().cloned().unwrap();
        NonStationaryPolicy { layers, tail }
    }

    /// Carries transition counts over from a previous agent (block restarts).
    pub fn adopt_counts(&mut self, other: &AgentState) {
        assert_eq!(self.num_states, other.num_states);
        assert_eq!(self.num_actions, other.num_actions);
        self.count_sa = other.count_sa.clone();
        self.count_sas = other.count_sas.clone();
    }
}

/// How an episode's (v_star, v_pi) pair is scored against the snapshot policy.
pub enum EpisodeEval<'a> {
    /// Realized: V*(x; H_k) vs V^π(x; H_k).
    Realized(&'a OptimalValues),
    /// Discounted: V*(x; γ) vs V^π(x; γ), both truncated at L layers.
    Discounted { v_star: &'a [f64], curve: &'a DiscountCurve, l: usize },
}

impl EpisodeEval<'_> {
    pub fn score(
        &self,
        mdp: &TabularMdp,
        policy: &NonStationaryPolicy,
        start: usize,
        h_k: usize,
    ) -> (f64, f64) {
        match self {
            EpisodeEval::Realized(oracle) => (
                oracle.value(h_k, start),
                crate::oracle::policy_value_finite_at(mdp, policy, start, h_k),
            ),
            EpisodeEval::Discounted { v_star, curve, l } => (
                v_star[start],
                crate::oracle::policy_value_curve_at(mdp, policy, curve, start, *l),
            ),
        }
    }
}

/// Builds the evaluation oracle for a regret mode. `eval_curve` is the true
/// horizon distribution's dual curve; `h_max` the largest scheduled length.
pub fn build_eval_oracle(
    mdp: &TabularMdp,
    mode: crate::trace::RegretMode,
    eval_curve: &DiscountCurve,
    h_max: usize,
) -> Result<EvalOracle> {
    match mode {
        crate::trace::RegretMode::Realized => {
            Ok(EvalOracle::Realized(OptimalValues::compute(mdp, h_max)))
        }
        crate::trace::RegretMode::Discounted => {
            let l = crate::oracle::default_truncation(eval_curve)?;
            let (v, _, _) = crate::oracle::discounted_optimal(mdp, eval_curve, l)?;
            Ok(EvalOracle::Discounted { v_star: v.values, l })
        }
    }
}

/// Owned counterpart of `EpisodeEval` for callers that build the oracle once.
pub enum EvalOracle {
    Realized(OptimalValues),
    Discounted { v_star: Vec<f64>, l: usize },
}

impl EvalOracle {
    pub fn as_eval<'a>(&'a self, eval_curve: &'a DiscountCurve) -> EpisodeEval<'a> {
        match self {
            EvalOracle::Realized(o) => EpisodeEval::Realized(o),
            EvalOracle::Discounted { v_star, l } => {
                EpisodeEval::Discounted { v_star, curve: eval_curve, l: *l }
            }
        }
    }
}

/// A pre-drawn episode schedule: (start state, drawn length) per episode.
/// Drawing the schedule before any learning keeps it identical across learners
/// running on the same seed, regardless of their action choices.
pub fn draw_schedule<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    dist: &HorizonDistribution,
    start: &StartStates,
    episodes: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    (0..episodes)
        .map(|_| {
            let s = start.sample(mdp, rng);
            let h = dist.sample_length(rng);
            (s, h)
        })
        .collect()
}

/// Runs the pre-initialized agent over a schedule, filling the regret trace.
/// A realized evaluator must cover the largest scheduled length.
pub fn run_schedule<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    agent: &mut AgentState,
    schedule: &[(usize, usize)],
    eval: &EpisodeEval,
    trial: usize,
    episode_offset: usize,
    block: Option<usize>,
    trace: &mut RegretTrace,
    rng: &mut R,
) {
    for (k, &(start, h_k)) in schedule.iter().enumerate() {
        agent.update_q_values(&mdp.reward);
        let policy = agent.greedy_policy();
        let (v_star, v_pi) = eval.score(mdp, &policy, start, h_k);
        let mut s = start;
        if !mdp.terminal[s] {
            for h in 1..=h_k {
                let a = agent.act(h, s);
                let (s2, _r) = mdp.step(s, a, rng);
                agent.observe(h, s, a, s2);
                s = s2;
                if mdp.terminal[s] {
                    break;
                }
            }
        }
        trace.push(trial, episode_offset + k + 1, h_k, v_star, v_pi, block);
    }
}

///// The full known-curve learning loop: T episodes of sweep → act → observe.
pub fn run_learner<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    dist: &HorizonDistribution,
    curve: &DiscountCurve,
    delta: f64,
    confidence: f64,
    episodes: usize,
    start: &StartStates,
    opts: AgentOptions,
    mode: crate::trace::RegretMode,
    rng: &mut R,
) -> Result<(RegretTrace, AgentState)> {
    mdp.validate()?;
    let mut agent = AgentState::init(
        (mdp.num_states, mdp.num_actions),
        curve,
        delta,
        confidence,
        episodes,
        opts,
    )?;
    let schedule = draw_schedule(mdp, dist, start, episodes, rng);
    let h_max = schedule.iter().map(|&(_, h)| h).max().unwrap_or(0);
    let oracle = build_eval_oracle(mdp, mode, curve, h_max)?;
    let eval = oracle.as_eval(curve);
    let mut trace = RegretTrace::new();
    run_schedule(mdp, &mut agent, &schedule, &eval, 0, 0, None, &mut trace, rng);
    Ok((trace, agent))
}

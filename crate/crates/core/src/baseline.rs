//! Fixed-horizon UCB-VI baselines (Hoeffding and Bernstein bonuses), run under
//! the same episodic protocol with randomly drawn true lengths.

use crate::discount::DiscountCurve;
use crate::error::Result;
use crate::horizon::HorizonDistribution;
use crate::mdp::{StartStates, TabularMdp};
use crate::trace::{RegretMode, RegretTrace};
use crate::ucbvi::{
    build_eval_oracle, draw_schedule, run_schedule, AgentOptions, AgentState, BonusForm, BonusRule,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_HOEFFDING_SCALE: f64 = 7.0;
pub const DEFAULT_BERNSTEIN_C1: f64 = 8.0;
pub const DEFAULT_BERNSTEIN_C2: f64 = 14.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonusKind {
    Hoeffding,
    Bernstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub assumed_h: usize,
    pub bonus_kind: BonusKind,
    pub confidence: f64,
    /// Leading constant of the Hoeffding bonus c·H·√(L/N).
    pub hoeffding_scale: f64,
    /// Bernstein constants: √(c1·L·Var/N) + c2·H·L/N.
    pub bernstein_c1: f64,
    pub bernstein_c2: f64,
}

impl BaselineConfig {
    pub fn new(assumed_h: usize, bonus_kind: BonusKind, confidence: f64) -> Self {
        BaselineConfig {
            assumed_h,
            bonus_kind,
            confidence,
            hoeffding_scale: DEFAULT_HOEFFDING_SCALE,
            bernstein_c1: DEFAULT_BERNSTEIN_C1,
            bernstein_c2: DEFAULT_BERNSTEIN_C2,
        }
    }
}

/// The point-mass survival curve of a fixed horizon H: γ = (1, …, 1, 0, …).
pub fn point_mass_curve(h: usize) -> DiscountCurve {
    DiscountCurve::custom(vec![1.0; h]).expect("point mass curve is valid")
}

/// Builds the baseline agent: undiscounted backward induction over assumed_H
/// layers (caps H−h+1, unit multipliers) with the configured bonus.
pub fn init_baseline_agent(
    dims: (usize, usize),
    cfg: &BaselineConfig,
    episodes: usize,
) -> Result<AgentState> {
    assert!(cfg.assumed_h >= 1);
    let curve = point_mass_curve(cfg.assumed_h);
    // Δ is immaterial for a zero tail (top layer value is 0); any valid value works.
    let delta = 0.5;
    let mut agent = AgentState::init_with_layers(
        dims,
        &curve,
        cfg.assumed_h,
        delta,
        cfg.confidence,
        episodes,
        AgentOptions::default(),
    )?;
    let h = cfg.assumed_h as f64;
    agent.log_factor = ((dims.0 * dims.1 * episodes.max(1) * cfg.assumed_h) as f64
        / cfg.confidence)
        .max(1.0)
        .ln();
    agent.bonus_rule = match cfg.bonus_kind {
        BonusKind::Hoeffding => BonusRule::Scaled {
            coef: vec![cfg.hoeffding_scale * h; cfg.assumed_h],
            form: BonusForm::SqrtLog,
        },
        BonusKind::Bernstein => BonusRule::Bernstein {
            horizon: h,
            c1: cfg.bernstein_c1,
            c2: cfg.bernstein_c2,
        },
    };
    Ok(agent)
}

/// Runs the baseline for T episodes; realized regret is measured against the
/// true per-episode optimum V*(x; H_k), discounted regret against the true
/// horizon distribution's dual curve.
pub fn run_baseline<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    dist: &HorizonDistribution,
    cfg: &BaselineConfig,
    episodes: usize,
    start: &StartStates,
    mode: RegretMode,
    rng: &mut R,
) -> Result<RegretTrace> {
    mdp.validate()?;
    let mut agent = init_baseline_agent((mdp.num_states, mdp.num_actions), cfg, episodes)?;
    let schedule = draw_schedule(mdp, dist, start, episodes, rng);
    let h_max = schedule.iter().map(|&(_, h)| h).max().unwrap_or(0);
    let eval_curve = dist.to_curve()?;
    let oracle = build_eval_oracle(mdp, mode, &eval_curve, h_max)?;
    let eval = oracle.as_eval(&eval_curve);
    let mut trace = RegretTrace::new();
    run_schedule(mdp, &mut agent, &schedule, &eval, 0, 0, None, &mut trace, rng);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_reduction_layer_caps() {
        let cfg = BaselineConfig::new(5, BonusKind::Hoeffding, 0.1);
        let agent = init_baseline_agent((3, 2), &cfg, 10).unwrap();
        assert_eq!(agent.n_layers, 5);
        for h in 1..=5 {
            assert!((agent.init_cap[h - 1] - (5 - h + 1) as f64).abs() < 1e-12);
            assert!((agent.ratio[h - 1] - if h < 5 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        assert_eq!(agent.top_value, 0.0);
    }

    #[test]
    fn coincides_with_generalized_learner_on_point_mass() {
        // same bonus rule injected into both recursions → identical sweeps
        let mdp = envs::build_chain(4, 0.2);
        let h = 4usize;
        let cfg = BaselineConfig::new(h, BonusKind::Hoeffding, 0.1);
        let mut baseline = init_baseline_agent((4, 2), &cfg, 20).unwrap();

        let curve = point_mass_curve(h);
        let mut general = AgentState::init_with_layers(
            (4, 2),
            &curve,
            h,
            0.5,
            0.1,
            20,
            AgentOptions::default(),
        )
        .unwrap();
        general.bonus_rule = baseline.bonus_rule.clone();
        general.log_factor = baseline.log_factor;

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = rng.gen_range(0..4);
            let a = rng.gen_range(0..2);
            let hh = rng.gen_range(1..=h);
            let (s2, _) = mdp.step(s, a, &mut rng);
            baseline.observe(hh, s, a, s2);
            general.observe(hh, s, a, s2);
        }
        baseline.update_q_values(&mdp.reward);
        general.update_q_values(&mdp.reward);
        for (qa, qb) in baseline.q.iter().zip(general.q.iter()) {
            for (x, y) in qa.iter().zip(qb.iter()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_action_mdp_zero_regret() {
        let mdp = envs::build_bandit(&[0.6]);
        let dist = HorizonDistribution::point_mass(3);
        let cfg = BaselineConfig::new(3, BonusKind::Hoeffding, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trace = run_baseline(&mdp, &dist, &cfg, 20, &StartStates::Fixed(0), RegretMode::Realized, &mut rng).unwrap();
        assert!(trace.rows.iter().all(|r| r.regret.abs() < 1e-12));
    }

    #[test]
    fn bandit_point_mass_sublinear() {
        let mdp = envs::build_bandit(&[0.2, 0.8]);
        let dist = HorizonDistribution::point_mass(1);
        let cfg = BaselineConfig {
            assumed_h: 1,
            bonus_kind: BonusKind::Hoeffding,
            confidence: 0.1,
            hoeffding_scale: 1.0,
            bernstein_c1: DEFAULT_BERNSTEIN_C1,
            bernstein_c2: DEFAULT_BERNSTEIN_C2,
        };
        let (mut at_t, mut at_2t) = (0.0, 0.0);
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace =
                run_baseline(&mdp, &dist, &cfg, 400, &StartStates::Fixed(0), RegretMode::Realized, &mut rng).unwrap();
            at_t += trace.cum_regret_at(200);
            at_2t += trace.cum_regret_at(400);
        }
        assert!(at_2t / at_t < 1.9, "ratio {}", at_2t / at_t);
    }

    #[test]
    fn bernstein_variant_learns_too() {
        let mdp = envs::build_bandit(&[0.1, 0.9]);
        let dist = HorizonDistribution::point_mass(1);
        let cfg = BaselineConfig {
            assumed_h: 1,
            bonus_kind: BonusKind::Bernstein,
            confidence: 0.1,
            hoeffding_scale: DEFAULT_HOEFFDING_SCALE,
            bernstein_c1: 1.0,
            bernstein_c2: 1.0,
        };
        let (mut at_t, mut at_2t) = (0.0, 0.0);
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace =
                run_baseline(&mdp, &dist, &cfg, 400, &StartStates::Fixed(0), RegretMode::Realized, &mut rng).unwrap();
            at_t += trace.cum_regret_at(200);
            at_2t += trace.cum_regret_at(400);
        }
        assert!(at_2t / at_t < 1.9, "ratio {}", at_2t / at_t);
    }

    #[test]
    fn misspecified_short_horizon_linear_regret() {
        // assumed_H = 1 on a chain that needs 2 steps to reach reward:
        // the myopic greedy policy never plans ahead
        let mdp = envs::build_chain(3, 0.0);
        let dist = HorizonDistribution::point_mass(2);
        let cfg = BaselineConfig::new(1, BonusKind::Hoeffding, 0.1);
        let mut slopes = Vec::new();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace =
                run_baseline(&mdp, &dist, &cfg, 100, &StartStates::Fixed(0), RegretMode::Realized, &mut rng).unwrap();
            let half = trace.cum_regret_at(50);
            let full = trace.cum_regret_at(100);
            slopes.push((full - half) / 50.0);
        }
        let mean_slope: f64 = slopes.iter().sum::<f64>() / slopes.len() as f64;
        assert!(mean_slope > 0.2, "slope {mean_slope}");
    }
}

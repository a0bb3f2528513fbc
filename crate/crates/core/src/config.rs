//! Experiment configuration: JSON schema for environments, horizon
//! distributions, learners, and run parameters. Unknown keys are rejected.

use crate::baseline::{
    BaselineConfig, BonusKind, DEFAULT_BERNSTEIN_C1, DEFAULT_BERNSTEIN_C2, DEFAULT_HOEFFDING_SCALE,
};
use crate::discount::{CurveKind, DiscountCurve};
use crate::envs;
use crate::error::{Error, Result};
use crate::horizon::HorizonDistribution;
use crate::mdp::{StartStates, TabularMdp};
use crate::trace::RegretMode;
use crate::ucbvi::BonusForm;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn default_confidence() -> f64 {
    0.1
}

fn default_trials() -> usize {
    1
}

/// Environment selector. `random` is deterministic in its own seed so the
/// same MDP is shared across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    Taxi,
    Chain { length: usize, slip_prob: f64 },
    Bandit { arms: Vec<f64> },
    Random { num_states: usize, num_actions: usize, sparsity: f64, seed: u64 },
}

impl EnvSpec {
    pub fn build(&self) -> Result<(TabularMdp, StartStates)> {
        let pair = match self {
            EnvSpec::Taxi => (envs::build_taxi(), envs::taxi_start()),
            EnvSpec::Chain { length, slip_prob } => {
                if *length < 2 {
                    return Err(Error::Config("chain length must be at least 2".into()));
                }
                if !(0.0..1.0).contains(slip_prob) {
                    return Err(Error::Config("slip_prob must lie in [0, 1)".into()));
                }
                (envs::build_chain(*length, *slip_prob), envs::chain_start())
            }
            EnvSpec::Bandit { arms } => {
                if arms.is_empty() {
                    return Err(Error::Config("bandit needs at least one arm".into()));
                }
                if arms.iter().any(|r| !(0.0..=1.0).contains(r)) {
                    return Err(Error::Config("arm rewards must lie in [0, 1]".into()));
                }
                (envs::build_bandit(arms), StartStates::Fixed(0))
            }
            EnvSpec::Random { num_states, num_actions, sparsity, seed } => {
                if *num_states == 0 || *num_actions == 0 {
                    return Err(Error::Config("random MDP needs states and actions".into()));
                }
                if !(0.0..1.0).contains(sparsity) {
                    return Err(Error::Config("sparsity must lie in [0, 1)".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (
                    envs::build_random(*num_states, *num_actions, *sparsity, &mut rng),
                    StartStates::UniformNonTerminal,
                )
            }
        };
        pair.0.validate()?;
        Ok(pair)
    }
}

/// Horizon-distribution spec: a curve schema tagged with `"role": "horizon"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSpec {
    pub role: HorizonRole,
    #[serde(flatten)]
    pub curve: CurveKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonRole {
    Horizon,
}

impl HorizonSpec {
    pub fn new(curve: CurveKind) -> Self {
        HorizonSpec { role: HorizonRole::Horizon, curve }
    }

    /// The survival curve dual to the horizon distribution.
    pub fn to_curve(&self) -> Result<DiscountCurve> {
        DiscountCurve::try_from(self.curve.clone())
    }

    pub fn to_distribution(&self) -> Result<HorizonDistribution> {
        HorizonDistribution::from_curve(&self.to_curve()?)
    }
}

/// Learner selector and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerSpec {
    /// Known-curve layered learner. `delta` defaults to the curve family's
    /// recommended tolerance for the configured episode count.
    Generalized {
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "default_confidence")]
        confidence: f64,
        #[serde(default)]
        bonus_form: BonusForm,
        #[serde(default)]
        update_unvisited: bool,
    },
    /// Fixed-horizon baseline with Hoeffding or Bernstein bonuses.
    Baseline {
        #[serde(rename = "assumed_H")]
        assumed_h: usize,
        bonus_kind: BonusKind,
        #[serde(default = "default_confidence")]
        confidence: f64,
        #[serde(default)]
        hoeffding_scale: Option<f64>,
        #[serde(default)]
        bernstein_c1: Option<f64>,
        #[serde(default)]
        bernstein_c2: Option<f64>,
    },
    /// Block-restarting learner that estimates the curve from observed lengths.
    Estimating {
        #[serde(rename = "H_star")]
        h_star: usize,
        #[serde(default = "default_confidence")]
        confidence: f64,
        /// Prior curve for block 0; defaults to geometric 0.5 truncated at H*.
        #[serde(default)]
        gamma0: Option<CurveKind>,
        #[serde(default)]
        reset_counts_per_block: bool,
        #[serde(default)]
        bonus_form: BonusForm,
        #[serde(default)]
        update_unvisited: bool,
    },
}

impl LearnerSpec {
    pub fn baseline_config(&self) -> Option<BaselineConfig> {
        match self {
            LearnerSpec::Baseline {
                assumed_h,
                bonus_kind,
                confidence,
                hoeffding_scale,
                bernstein_c1,
                bernstein_c2,
            } => Some(BaselineConfig {
                assumed_h: *assumed_h,
                bonus_kind: *bonus_kind,
                confidence: *confidence,
                hoeffding_scale: hoeffding_scale.unwrap_or(DEFAULT_HOEFFDING_SCALE),
                bernstein_c1: bernstein_c1.unwrap_or(DEFAULT_BERNSTEIN_C1),
                bernstein_c2: bernstein_c2.unwrap_or(DEFAULT_BERNSTEIN_C2),
            }),
            _ => None,
        }
    }

    /// Short tag used in default output labels.
    pub fn tag(&self) -> String {
        match self {
            LearnerSpec::Generalized { .. } => "generalized".into(),
            LearnerSpec::Baseline { assumed_h, bonus_kind, .. } => {
                let kind = match bonus_kind {
                    BonusKind::Hoeffding => "hoeffding",
                    BonusKind::Bernstein => "bernstein",
                };
                format!("baseline_{kind}_H{assumed_h}")
            }
            LearnerSpec::Estimating { h_star, .. } => format!("estimating_H{h_star}"),
        }
    }
}

/// Top-level experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output label; defaults to the learner tag.
    #[serde(default)]
    pub label: Option<String>,
    pub env: EnvSpec,
    pub horizon: HorizonSpec,
    pub learner: LearnerSpec,
    pub episodes: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub regret_mode: RegretMode,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        match &self.learner {
            LearnerSpec::Generalized { delta, confidence, .. } => {
                if let Some(d) = delta {
                    if !(d.is_finite() && *d > 0.0) {
                        return Err(Error::Config("delta must be positive".into()));
                    }
                }
                check_confidence(*confidence)?;
            }
            LearnerSpec::Baseline { assumed_h, confidence, .. } => {
                if *assumed_h < 1 {
                    return Err(Error::Config("assumed_H must be at least 1".into()));
                }
                check_confidence(*confidence)?;
            }
            LearnerSpec::Estimating { h_star, confidence, gamma0, .. } => {
                if *h_star < 1 {
                    return Err(Error::Config("H_star must be at least 1".into()));
                }
                check_confidence(*confidence)?;
                if let Some(kind) = gamma0 {
                    DiscountCurve::try_from(kind.clone())?;
                }
            }
        }
        self.horizon.to_curve()?;
        self.env.build()?;
        Ok(())
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.learner.tag())
    }
}

fn check_confidence(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
        return Err(Error::Config("confidence must lie in (0, 1)".into()));
    }
    Ok(())
}

//! Finite tabular MDPs and episode simulation with externally drawn lengths.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A finite MDP with deterministic rewards in [0,1] and absorbing terminal states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    pub num_states: usize,
    pub num_actions: usize,
    /// transition[s][a][s'] = P(s'|s,a); each row a probability vector.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// reward[s][a] in [0,1].
    pub reward: Vec<Vec<f64>>,
    /// Absorbing states; entering one ends the episode early.
    pub terminal: Vec<bool>,
}

/// One step of a rollout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// A full episode rollout against a drawn length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub start_state: usize,
    pub drawn_length: usize,
    pub trajectory: Vec<Step>,
}

/// How an environment supplies episode start states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartStates {
    Fixed(usize),
    UniformNonTerminal,
}

impl StartStates {
    pub fn sample<R: Rng + ?Sized>(&self, mdp: &TabularMdp, rng: &mut R) -> usize {
        match self {
            StartStates::Fixed(s) => *s,
            StartStates::UniformNonTerminal => {
                let live: Vec<usize> =
                    (0..mdp.num_states).filter(|&s| !mdp.terminal[s]).collect();
                live[rng.gen_range(0..live.len())]
            }
        }
    }
}

impl TabularMdp {
    /// Checks the structural invariants: stochastic rows, rewards in [0,1],
    /// terminal states absorbing with zero reward.
    pub fn validate(&self) -> Result<()> {
        if self.num_states == 0 || self.num_actions == 0 {
            return Err(Error::Domain("need at least one state and action".into()));
        }
        if self.transition.len() != self.num_states
            || self.reward.len() != self.num_states
            || self.terminal.len() != self.num_states
        {
            return Err(Error::Domain("table shapes disagree with num_states".into()));
        }
        for s in 0..self.num_states {
            if self.transition[s].len() != self.num_actions || self.reward[s].len() != self.num_actions {
                return Err(Error::Domain(format!("state {s}: wrong action dimension")));
            }
            for a in 0..self.num_actions {
                let row = &self.transition[s][a];
                if row.len() != self.num_states {
                    return Err(Error::Domain(format!("row ({s},{a}): wrong length")));
                }
                if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                    return Err(Error::Domain(format!("row ({s},{a}): negative entry")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Domain(format!("row ({s},{a}) sums to {sum}")));
                }
                let r = self.reward[s][a];
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::Domain(format!("reward ({s},{a}) = {r} outside [0,1]")));
                }
                if self.terminal[s] {
                    if r != 0.0 {
                        return Err(Error::Domain(format!("terminal state {s} has nonzero reward")));
                    }
                    if row[s] != 1.0 {
                        return Err(Error::Domain(format!("terminal state {s} is not absorbing")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples a transition: next state from the kernel row, deterministic reward.
    pub fn step<R: Rng + ?Sized>(&self, state: usize, action: usize, rng: &mut R) -> (usize, f64) {
        let row = &self.transition[state][action];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = row.len() - 1;
        for (s2, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = s2;
                break;
            }
        }
        (next, self.reward[state][action])
    }

    /// Rolls a step-indexed policy (h starts at 1) for `horizon` steps or until
    /// a terminal state is entered, whichever comes first.
    pub fn run_episode<R, P>(
        &self,
        mut policy: P,
        start_state: usize,
        horizon: usize,
        rng: &mut R,
    ) -> EpisodeRecord
    where
        R: Rng + ?Sized,
        P: FnMut(usize, usize) -> usize,
    {
        assert!(horizon >= 1);
        let mut trajectory = Vec::new();
        let mut state = start_state;
        if !self.terminal[state] {
            for h in 1..=horizon {
                let action = policy(h, state);
                let (next_state, reward) = self.step(state, action, rng);
                trajectory.push(Step { state, action, reward, next_state });
                state = next_state;
                if self.terminal[state] {
                    break;
                }
            }
        }
        EpisodeRecord { start_state, drawn_length: horizon, trajectory }
    }
}

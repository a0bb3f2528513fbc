//! Per-episode regret records shared by learners and the harness.

use serde::{Deserialize, Serialize};

/// Which regret definition a run reports: realized per-episode optima
/// V*(x; H_k), or the discounted objective V*(x; γ) with truncated oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    #[default]
    Realized,
    Discounted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub trial: usize,
    /// 1-based episode index.
    pub episode: usize,
    pub h_k: usize,
    pub v_star: f64,
    pub v_pi: f64,
    pub regret: f64,
    pub cum_regret: f64,
    /// Doubling-block index for the estimating learner, absent otherwise.
    pub block: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub rows: Vec<RegretRow>,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an episode, maintaining the cumulative column.
    pub fn push(
        &mut self,
        trial: usize,
        episode: usize,
        h_k: usize,
        v_star: f64,
        v_pi: f64,
        block: Option<usize>,
    ) {
        let regret = v_star - v_pi;
        let cum = self.rows.last().map_or(0.0, |r| r.cum_regret) + regret;
        self.rows.push(RegretRow { trial, episode, h_k, v_star, v_pi, regret, cum_regret: cum, block });
    }

    pub fn final_cum_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn cum_regret_at(&self, episode: usize) -> f64 {
        self.rows
            .iter()
            .rev()
            .find(|r| r.episode <= episode)
            .map_or(0.0, |r| r.cum_regret)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

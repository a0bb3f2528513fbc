//! Multi-trial experiment runner: seeded parallel trials, per-trial trace CSV,
//! per-episode summary CSV, and multi-config comparison tables.

use crate::config::{ExperimentConfig, LearnerSpec};
use crate::discount::DiscountCurve;
use crate::error::{Error, Result};
use crate::estimator::{run_estimating_learner, EstimatorOptions};
use crate::mdp::{StartStates, TabularMdp};
use crate::trace::RegretTrace;
use crate::trial_seed;
use crate::ucbvi::{run_learner, AgentOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

/// Aggregated result of one experiment: per-episode mean cumulative regret and
/// standard error across trials, plus the files written.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub label: String,
    pub episodes: usize,
    pub trials: usize,
    pub mean_cum_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs one seeded trial of the configured learner.
pub fn run_trial(
    cfg: &ExperimentConfig,
    mdp: &TabularMdp,
    start: &StartStates,
    dist: &crate::horizon::HorizonDistribution,
    curve: &DiscountCurve,
    trial: usize,
) -> Result<RegretTrace> {
    if cfg.episodes == 0 {
        return Ok(RegretTrace::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    let mut trace = match &cfg.learner {
        LearnerSpec::Generalized { delta, confidence, bonus_form, update_unvisited } => {
            let delta = delta.unwrap_or_else(|| curve.recommended_params(cfg.episodes).1);
            let opts = AgentOptions { bonus_form: *bonus_form, update_unvisited: *update_unvisited };
            run_learner(
                mdp,
                dist,
                curve,
                delta,
                *confidence,
                cfg.episodes,
                start,
                opts,
                cfg.regret_mode,
                &mut rng,
            )?
            .0
        }
        LearnerSpec::Baseline { .. } => {
            let bc = cfg.learner.baseline_config().expect("baseline spec");
            crate::baseline::run_baseline(
                mdp,
                dist,
                &bc,
                cfg.episodes,
                start,
                cfg.regret_mode,
                &mut rng,
            )?
        }
        LearnerSpec::Estimating {
            h_star,
            confidence,
            gamma0,
            reset_counts_per_block,
            bonus_form,
            update_unvisited,
        } => {
            let prior = match gamma0 {
                Some(kind) => Some(DiscountCurve::try_from(kind.clone())?),
                None => None,
            };
            let opts = EstimatorOptions {
                prior,
                reset_counts_per_block: *reset_counts_per_block,
                agent: AgentOptions {
                    bonus_form: *bonus_form,
                    update_unvisited: *update_unvisited,
                },
            };
            run_estimating_learner(
                mdp,
                dist,
                *h_star,
                *confidence,
                cfg.episodes,
                start,
                &opts,
                cfg.regret_mode,
                &mut rng,
            )?
        }
    };
    for row in &mut trace.rows {
        row.trial = trial;
    }
    Ok(trace)
}

/// Runs all trials (in parallel, order-independently) without touching disk.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<RegretTrace>> {
    cfg.validate()?;
    let (mdp, start) = cfg.env.build()?;
    let curve = cfg.horizon.to_curve()?;
    let dist = cfg.horizon.to_distribution()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &mdp, &start, &dist, &curve, t))
        .collect()
}

/// Per-episode mean cumulative regret and standard error over trials.
/// Standard error is the sample standard deviation (n−1) over √n; 0 when n=1.
pub fn summarize(traces: &[RegretTrace], episodes: usize) -> (Vec<f64>, Vec<f64>) {
    let n = traces.len();
    let mut means = Vec::with_capacity(episodes);
    let mut errs = Vec::with_capacity(episodes);
    for ep in 1..=episodes {
        let vals: Vec<f64> = traces.iter().map(|t| t.cum_regret_at(ep)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        means.push(mean);
        errs.push(se);
    }
    (means, errs)
}

fn format_float(x: f64) -> String {
    format!("{x}")
}

fn trace_csv(traces: &[RegretTrace]) -> String {
    let mut out = String::from("trial,episode,H_k,v_star,v_pi,regret,cum_regret,block\n");
    for trace in traces {
        for r in &trace.rows {
            let block = r.block.map(|b| b.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.trial,
                r.episode,
                r.h_k,
                format_float(r.v_star),
                format_float(r.v_pi),
                format_float(r.regret),
                format_float(r.cum_regret),
                block
            ));
        }
    }
    out
}

fn summary_csv(means: &[f64], errs: &[f64], trials: usize) -> String {
    let mut out = String::from("episode,mean_cum_regret,stderr,n_trials\n");
    for (i, (m, e)) in means.iter().zip(errs).enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            format_float(*m),
            format_float(*e),
            trials
        ));
    }
    out
}

/// Runs the experiment and writes `<label>_trace.csv` and `<label>_summary.csv`
/// under `out_dir`. Partially written outputs are removed on failure.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentSummary> {
    let traces = run_trials(cfg)?;
    let (means, errs) = summarize(&traces, cfg.episodes);
    let label = cfg.label();

    fs::create_dir_all(out_dir)?;
    let trace_path = out_dir.join(format!("{label}_trace.csv"));
    let summary_path = out_dir.join(format!("{label}_summary.csv"));
    fs::write(&trace_path, trace_csv(&traces))?;
    if let Err(e) = fs::write(&summary_path, summary_csv(&means, &errs, cfg.trials)) {
        let _ = fs::remove_file(&trace_path);
        return Err(e.into());
    }
    Ok(ExperimentSummary {
        label,
        episodes: cfg.episodes,
        trials: cfg.trials,
        mean_cum_regret: means,
        stderr: errs,
        trace_path,
        summary_path,
    })
}

/// Runs each config and writes `compare.csv`: for every config, in order, a
/// `<label>_mean_cum_regret` column and a `<label>_stderr` column, one row per
/// episode. Configs must share the environment, horizon, and episode count.
pub fn compare(cfgs: &[ExperimentConfig], out_dir: &Path) -> Result<PathBuf> {
    if cfgs.len() < 2 {
        return Err(Error::Config("compare needs at least 2 configs".into()));
    }
    let first = &cfgs[0];
    for cfg in &cfgs[1..] {
        if cfg.env != first.env {
            return Err(Error::Config("compared configs must share the environment".into()));
        }
        if cfg.horizon != first.horizon {
            return Err(Error::Config(
                "compared configs must share the horizon distribution".into(),
            ));
        }
        if cfg.episodes != first.episodes {
            return Err(Error::Config("compared configs must share the episode count".into()));
        }
    }
    // Repeated labels get an index suffix so column names stay unique.
    let mut labels: Vec<String> = Vec::new();
    for cfg in cfgs {
        let base = cfg.label();
        let mut label = base.clone();
        let mut i = 2;
        while labels.contains(&label) {
            label = format!("{base}_{i}");
            i += 1;
        }
        labels.push(label);
    }

    let mut columns: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for cfg in cfgs {
        let traces = run_trials(cfg)?;
        columns.push(summarize(&traces, cfg.episodes));
    }

    let mut out = String::new();
    let header: Vec<String> = labels
        .iter()
        .flat_map(|l| [format!("{l}_mean_cum_regret"), format!("{l}_stderr")])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for ep in 0..first.episodes {
        let row: Vec<String> = columns
            .iter()
            .flat_map(|(m, e)| [format_float(m[ep]), format_float(e[ep])])
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }

    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("compare.csv");
    fs::write(&path, out)?;
    Ok(path)
}

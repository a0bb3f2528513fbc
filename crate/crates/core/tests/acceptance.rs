//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see all lines.

use horizon_rl::baseline::BonusKind;
use horizon_rl::config::{EnvSpec, ExperimentConfig, HorizonSpec, LearnerSpec};
use horizon_rl::discount::{CurveKind, DiscountCurve, GeometricParams};
use horizon_rl::envs;
use horizon_rl::estimator::{
    dkw_band, empirical_survival, run_estimating_learner, tail_sum_bound, EstimatorOptions,
};
use horizon_rl::harness;
use horizon_rl::horizon::HorizonDistribution;
use horizon_rl::mdp::{StartStates, TabularMdp};
use horizon_rl::oracle::{
    default_truncation, discounted_optimal, evaluate_policy_curve, evaluate_policy_finite,
    finite_horizon_optimal, NonStationaryPolicy,
};
use horizon_rl::trace::RegretMode;
use horizon_rl::ucbvi::{draw_schedule, run_learner, AgentOptions, AgentState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: usize, name: &str, ok: bool) {
    println!("acceptance criterion {n} ({name}): {}", if ok { "PASS" } else { "FAIL" });
}

/// Fifty seeded random MDPs with S ≤ 4, A ≤ 3.
fn instance_mdps() -> Vec<TabularMdp> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE55);
    (0..50)
        .map(|_| {
            let s = rng.gen_range(2..=4);
            let a = rng.gen_range(1..=3);
            envs::build_random(s, a, 0.3, &mut rng)
        })
        .collect()
}

/// Three finite-support horizon distributions (supports 3, 5, 8).
fn instance_dists() -> Vec<HorizonDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD157);
    [3usize, 5, 8]
        .iter()
        .map(|&len| {
            let mut w: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 0.05).collect();
            let total: f64 = w.iter().sum();
            for x in &mut w {
                *x /= total;
            }
            HorizonDistribution::from_pmf(&w).unwrap()
        })
        .collect()
}

fn random_stationary_policy<R: Rng>(mdp: &TabularMdp, rng: &mut R) -> NonStationaryPolicy {
    let actions = (0..mdp.num_states).map(|_| rng.gen_range(0..mdp.num_actions)).collect();
    NonStationaryPolicy::stationary(actions)
}

#[test]
fn criterion_01_equivalence_identity() {
    let mdps = instance_mdps();
    let dists = instance_dists();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9011);
    let mut ok = true;
    for mdp in &mdps {
        for _ in 0..5 {
            let policy = random_stationary_policy(mdp, &mut rng);
            for dist in &dists {
                let curve = dist.to_curve().unwrap();
                let l = dist.max_support();
                let slack = curve.tail_sum(l + 1) + 1e-9;
                let (curve_vals, _) = evaluate_policy_curve(mdp, &policy, &curve, l).unwrap();
                for x in 0..mdp.num_states {
                    let mix: f64 = (1..=l)
                        .filter(|&h| dist.pmf(h) > 0.0)
                        .map(|h| dist.pmf(h) * evaluate_policy_finite(mdp, &policy, h).values[x])
                        .sum();
                    if (mix - curve_vals.values[x]).abs() > slack {
                        ok = false;
                    }
                }
            }
        }
    }
    report(1, "equivalence identity", ok);
    assert!(ok);
}

#[test]
fn criterion_02_mixture_sandwich_and_duality() {
    let mdps = instance_mdps();
    let dists = instance_dists();
    let mut sandwich_ok = true;
    let mut worst_gap = 0.0f64;
    for mdp in &mdps {
        for dist in &dists {
            let curve = dist.to_curve().unwrap();
            let l = dist.max_support();
            let slack = curve.tail_sum(l + 1) + 1e-9;
            let (v_curve, _, _) = discounted_optimal(mdp, &curve, l).unwrap();
            for x in 0..mdp.num_states {
                let mix: f64 = (1..=l)
                    .filter(|&h| dist.pmf(h) > 0.0)
                    .map(|h| dist.pmf(h) * finite_horizon_optimal(mdp, h).0.values[x])
                    .sum();
                let gap = mix - v_curve.values[x];
                if gap > slack {
                    sandwich_ok = false;
                    worst_gap = worst_gap.max(gap);
                }
            }
        }
    }
    let mut duality_ok = true;
    for dist in &dists {
        let curve = dist.to_curve().unwrap();
        let back = HorizonDistribution::from_curve(&curve).unwrap().to_curve().unwrap();
        for h in 1..=dist.max_support() + 1 {
            if (back.gamma(h) - curve.gamma(h)).abs() > 1e-12 {
                duality_ok = false;
            }
        }
    }
    let ok = sandwich_ok && duality_ok;
    report(2, "mixture sandwich + duality round trip", ok);
    assert!(
        ok,
        "sandwich_ok={sandwich_ok} (worst gap {worst_gap}), duality_ok={duality_ok}"
    );
}

#[test]
fn criterion_03_oracle_vs_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0F0);
    let mut ok = true;
    for s_n in 1..=3usize {
        for a_n in 1..=2usize {
            for h in 1..=3usize {
                for _ in 0..3 {
                    let mdp = envs::build_random(s_n, a_n, 0.2, &mut rng);
                    let (vt, _) = finite_horizon_optimal(&mdp, h);
                    let mut best = vec![f64::NEG_INFINITY; s_n];
                    let n_pol = a_n.pow((s_n * h) as u32);
                    for code in 0..n_pol {
                        let mut c = code;
                        let mut layers = Vec::with_capacity(h);
                        for _ in 0..h {
                            let mut layer = Vec::with_capacity(s_n);
                            for _ in 0..s_n {
                                layer.push(c % a_n);
                                c /= a_n;
                            }
                            layers.push(layer);
                        }
                        let tail = layers[h - 1].clone();
                        let policy = NonStationaryPolicy { layers, tail };
                        let vals = evaluate_policy_finite(&mdp, &policy, h).values;
                        for x in 0..s_n {
                            if vals[x] > best[x] {
                                best[x] = vals[x];
                            }
                        }
                    }
                    for x in 0..s_n {
                        if (vt.values[x] - best[x]).abs() > 1e-12 {
                            ok = false;
                        }
                    }
                }
            }
        }
    }
    report(3, "oracle matches brute-force policy search", ok);
    assert!(ok);
}

#[test]
fn criterion_04_optimism() {
    let curve = DiscountCurve::geometric(0.5).unwrap();
    let dist = HorizonDistribution::from_curve(&curve).unwrap();
    let t = 50usize;
    let delta = curve.recommended_params(t).1;
    let envs_list: Vec<(TabularMdp, StartStates)> = vec![
        (envs::build_bandit(&[0.2, 0.8]), StartStates::Fixed(0)),
        (envs::build_chain(2, 0.2), StartStates::Fixed(0)),
    ];
    let mut violating_runs = 0usize;
    let total_runs = 200usize;
    for (env_idx, (mdp, start)) in envs_list.iter().enumerate() {
        let l = default_truncation(&curve).unwrap();
        let (v_star, _, _) = discounted_optimal(mdp, &curve, l).unwrap();
        for seed in 0..(total_runs / envs_list.len()) as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 7 + env_idx as u64);
            let mut agent = AgentState::init(
                (mdp.num_states, mdp.num_actions),
                &curve,
                delta,
                0.1,
                t,
                AgentOptions::default(),
            )
            .unwrap();
            let schedule = draw_schedule(mdp, &dist, start, t, &mut rng);
            let mut violated = false;
            for &(s0, h_k) in &schedule {
                agent.update_q_values(&mdp.reward);
                for s in 0..mdp.num_states {
                    if !mdp.terminal[s] && agent.v[0][s] < v_star.values[s] - 1e-9 {
                        violated = true;
                    }
                }
                let mut s = s0;
                if !mdp.terminal[s] {
                    for h in 1..=h_k {
                        let a = agent.act(h, s);
                        let (s2, _) = mdp.step(s, a, &mut rng);
                        agent.observe(h, s, a, s2);
                        s = s2;
                        if mdp.terminal[s] {
                            break;
                        }
                    }
                }
            }
            if violated {
                violating_runs += 1;
            }
        }
    }
    let frac = violating_runs as f64 / total_runs as f64;
    let ok = frac <= 0.1 + 0.05;
    report(4, "optimism violation rate", ok);
    assert!(ok, "violation fraction {frac}");
}

#[test]
fn criterion_05_sublinear_regret_generalized() {
    let curve = DiscountCurve::geometric(0.9).unwrap();
    let dist = HorizonDistribution::from_curve(&curve).unwrap();
    let mdp = envs::build_bandit(&[0.2, 0.8]);
    let t = 400usize;
    let delta = curve.recommended_params(t).1;
    let (mut r100, mut r200, mut r400) = (0.0, 0.0, 0.0);
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (trace, _) = run_learner(
            &mdp,
            &dist,
            &curve,
            delta,
            0.1,
            t,
            &StartStates::Fixed(0),
            AgentOptions::default(),
            RegretMode::Realized,
            &mut rng,
        )
        .unwrap();
        r100 += trace.cum_regret_at(100);
        r200 += trace.cum_regret_at(200);
        r400 += trace.cum_regret_at(400);
    }
    let ratio_hi = r400 / r200;
    let ratio_lo = r200 / r100;
    let ok = ratio_hi <= 1.75 && ratio_lo <= 1.9;
    report(5, "sublinear regret of the generalized learner", ok);
    assert!(
        ok,
        "regret(400)/regret(200) = {ratio_hi} (need <= 1.75), regret(200)/regret(100) = {ratio_lo} (need <= 1.9)"
    );
}

fn geometric_09_samples(rep: u64, n: usize) -> Vec<usize> {
    let curve = DiscountCurve::geometric(0.9).unwrap();
    let dist = HorizonDistribution::from_curve(&curve).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xDC0 + rep);
    (0..n).map(|_| dist.sample_length(&mut rng)).collect()
}

#[test]
fn criterion_06_dkw_band() {
    let curve = DiscountCurve::geometric(0.9).unwrap();
    let n = 10_000usize;
    let eps = dkw_band(n, 0.05);
    let mut violations = 0usize;
    for rep in 0..100u64 {
        let samples = geometric_09_samples(rep, n);
        let es = empirical_survival(&samples).unwrap();
        let mut sup = 0.0f64;
        for h in 1..=es.max_observed() + 1 {
            sup = sup.max((es.survival_hat(h) - curve.gamma(h)).abs());
        }
        if sup > eps {
            violations += 1;
        }
    }
    let ok = violations <= 10;
    report(6, "DKW sup-norm band", ok);
    assert!(ok, "{violations} violations out of 100");
}

#[test]
fn criterion_07_tail_sum_estimation() {
    let curve = DiscountCurve::geometric(0.9).unwrap();
    let n = 10_000usize;
    let d = 100usize;
    let bound = tail_sum_bound(d, n, 0.05);
    let mut violations = 0usize;
    let mut formulas_agree = true;
    for rep in 0..100u64 {
        let samples = geometric_09_samples(rep, n);
        let es = empirical_survival(&samples).unwrap();
        let mut worst = 0.0f64;
        for h in 1..=d {
            let hat = es.tail_sum_hat(h);
            worst = worst.max((hat - curve.tail_sum(h)).abs());
            if hat.to_bits() != es.tail_sum_hat_hinge(h, &samples).to_bits() {
                formulas_agree = false;
            }
        }
        if worst > bound {
            violations += 1;
        }
    }
    let band_ok = violations <= 10;
    let ok = band_ok && formulas_agree;
    report(7, "tail-sum estimation band + formula agreement", ok);
    assert!(
        ok,
        "band violations {violations}/100 (need <= 10, bound {bound}), formulas_agree={formulas_agree}"
    );
}

#[test]
fn criterion_08_taxi_ordering() {
    let horizon =
        HorizonSpec::new(CurveKind::Geometric { params: GeometricParams { gamma: 0.95 } });
    let base = ExperimentConfig {
        label: None,
        env: EnvSpec::Taxi,
        horizon,
        learner: LearnerSpec::Generalized {
            delta: None,
            confidence: 0.1,
            bonus_form: Default::default(),
            update_unvisited: false,
        },
        episodes: 100,
        trials: 10,
        seed: 2024,
        regret_mode: RegretMode::Realized,
    };
    let final_stats = |cfg: &ExperimentConfig| -> (f64, f64) {
        let traces = harness::run_trials(cfg).unwrap();
        let (means, errs) = harness::summarize(&traces, cfg.episodes);
        (means[cfg.episodes - 1], errs[cfg.episodes - 1])
    };
    let (gen_mean, gen_se) = final_stats(&base);
    let mut ok = true;
    let mut detail = String::new();
    for assumed_h in [10usize, 20, 30] {
        let mut cfg = base.clone();
        cfg.learner = LearnerSpec::Baseline {
            assumed_h,
            bonus_kind: BonusKind::Hoeffding,
            confidence: 0.1,
            hoeffding_scale: None,
            bernstein_c1: None,
            bernstein_c2: None,
        };
        let (b_mean, b_se) = final_stats(&cfg);
        let pooled = (gen_se * gen_se + b_se * b_se).sqrt();
        if gen_mean > b_mean + pooled {
            ok = false;
        }
        detail.push_str(&format!(
            "H={assumed_h}: gen {gen_mean:.4} vs baseline {b_mean:.4} (pooled se {pooled:.4}); "
        ));
    }
    report(8, "Taxi ordering vs fixed-horizon baselines", ok);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_09_estimator_parity() {
    let curve = DiscountCurve::geometric(0.95).unwrap();
    let dist = HorizonDistribution::from_curve(&curve).unwrap();
    let mdp = envs::build_bandit(&[0.2, 0.8]);
    let t = 400usize;
    let delta = curve.recommended_params(t).1;
    let h_star = curve.effective_horizon(delta).unwrap().n_delta;
    let mut known_total = 0.0;
    let mut est_total = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (known, _) = run_learner(
            &mdp,
            &dist,
            &curve,
            delta,
            0.1,
            t,
            &StartStates::Fixed(0),
            AgentOptions::default(),
            RegretMode::Realized,
            &mut rng,
        )
        .unwrap();
        known_total += known.final_cum_regret();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let est = run_estimating_learner(
            &mdp,
            &dist,
            h_star,
            0.1,
            t,
            &StartStates::Fixed(0),
            &EstimatorOptions::default(),
            RegretMode::Realized,
            &mut rng,
        )
        .unwrap();
        est_total += est.final_cum_regret();
    }
    let ok = est_total <= 2.0 * known_total + 1e-9;
    report(9, "estimator parity with the known-curve learner", ok);
    assert!(ok, "estimating {est_total} vs known {known_total}");
}

#[test]
fn criterion_10_determinism_and_plumbing() {
    let cfg = ExperimentConfig {
        label: Some("det".into()),
        env: EnvSpec::Bandit { arms: vec![0.3, 0.7] },
        horizon: HorizonSpec::new(CurveKind::Geometric {
            params: GeometricParams { gamma: 0.5 },
        }),
        learner: LearnerSpec::Estimating {
            h_star: 6,
            confidence: 0.1,
            gamma0: None,
            reset_counts_per_block: false,
            bonus_form: Default::default(),
            update_unvisited: false,
        },
        episodes: 30,
        trials: 3,
        seed: 99,
        regret_mode: RegretMode::Realized,
    };
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let s1 = harness::run_experiment(&cfg, dir1.path()).unwrap();
    let s2 = harness::run_experiment(&cfg, dir2.path()).unwrap();
    let t1 = std::fs::read(&s1.trace_path).unwrap();
    let identical = t1 == std::fs::read(&s2.trace_path).unwrap()
        && std::fs::read(&s1.summary_path).unwrap() == std::fs::read(&s2.summary_path).unwrap();

    // cumulative column must be the running per-trial sum of the regret column
    let text = String::from_utf8(t1).unwrap();
    let mut running: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
    let mut sums_ok = true;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let trial: usize = cells[0].parse().unwrap();
        let regret: f64 = cells[5].parse().unwrap();
        let cum: f64 = cells[6].parse().unwrap();
        let acc = running.entry(trial).or_insert(0.0);
        *acc += regret;
        if (cum - *acc).abs() > 1e-9 {
            sums_ok = false;
        }
    }
    let ok = identical && sums_ok;
    report(10, "determinism and CSV plumbing", ok);
    assert!(ok, "identical={identical}, sums_ok={sums_ok}");
}

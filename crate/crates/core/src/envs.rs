//! Benchmark environments: a Taxi-style 5×5 gridworld, a chain MDP, bandits,
//! and a seeded random-MDP generator.

use crate::mdp::{StartStates, TabularMdp};
use rand::Rng;

pub const TAXI_STATES: usize = 500;
pub const TAXI_ACTIONS: usize = 6;

/// Depot coordinates (row, col): Red, Green, Yellow, Blue.
const DEPOTS: [(usize, usize); 4] = [(0, 0), (0, 4), (4, 0), (4, 3)];

/// Vertical walls as (row, col) pairs blocking movement between col and col+1.
const WALLS: [(usize, usize); 6] = [(0, 1), (1, 1), (3, 0), (4, 0), (3, 2), (4, 2)];

fn taxi_encode(row: usize, col: usize, pass: usize, dest: usize) -> usize {
    ((row * 5 + col) * 5 + pass) * 4 + dest
}

fn wall_blocks_east(row: usize, col: usize) -> bool {
    WALLS.contains(&(row, col))
}

fn scale(raw: f64) -> f64 {
    (raw + 10.0) / 30.0
}

/// The 5×5 Taxi gridworld: 500 states, 6 actions (south, north, east, west,
/// pickup, dropoff). Raw rewards −1 / −10 / +20 are affinely rescaled to [0,1]
/// via (r+10)/30; delivery states (passenger at destination) are terminal.
pub fn build_taxi() -> TabularMdp {
    let s_n = TAXI_STATES;
    let a_n = TAXI_ACTIONS;
    let mut transition = vec![vec![vec![0.0; s_n]; a_n]; s_n];
    let mut reward = vec![vec![0.0; a_n]; s_n];
    let mut terminal = vec![false; s_n];

    for row in 0..5 {
        for col in 0..5 {
            for pass in 0..5 {
                for dest in 0..4 {
                    let s = taxi_encode(row, col, pass, dest);
                    if pass < 4 && pass == dest {
                        terminal[s] = true;
                        for a in 0..a_n {
                            transition[s][a][s] = 1.0;
                            reward[s][a] = 0.0;
                        }
                        continue;
                    }
                    for a in 0..a_n {
                        let (mut nrow, mut ncol, mut npass) = (row, col, pass);
                        let raw;
                        match a {
                            0 => {
                                // south
                                if row < 4 {
                                    nrow = row + 1;
                                }
                                raw = -1.0;
                            }
                            1 => {
                                // north
                                if row > 0 {
                                    nrow = row - 1;
                                }
                                raw = -1.0;
                            }
                            2 => {
                                // east
                                if col < 4 && !wall_blocks_east(row, col) {
                                    ncol = col + 1;
                                }
                                raw = -1.0;
                            }
                            3 => {
                                // west
                                if col > 0 && !wall_blocks_east(row, col - 1) {
                                    ncol = col - 1;
                                }
                                raw = -1.0;
                            }
                            4 => {
                                // pickup
                                if pass < 4 && (row, col) == DEPOTS[pass] {
                                    npass = 4;
                                    raw = -1.0;
                                } else {
                                    raw = -10.0;
                                }
                            }
                            _ => {
                                // dropoff
                                if pass == 4 && (row, col) == DEPOTS[dest] {
                                    npass = dest;
                                    raw = 20.0;
                                } else if pass == 4 {
                                    if let Some(at) = DEPOTS.iter().position(|&d| d == (row, col)) {
                                        npass = at;
                                        raw = -1.0;
                                    } else {
                                        raw = -10.0;
                                    }
                                } else {
                                    raw = -10.0;
                                }
                            }
                        }
                        let s2 = taxi_encode(nrow, ncol, npass, dest);
                        transition[s][a][s2] = 1.0;
                        reward[s][a] = scale(raw);
                    }
                }
            }
        }
    }

    let mdp = TabularMdp { num_states: s_n, num_actions: a_n, transition, reward, terminal };
    debug_assert!(mdp.validate().is_ok());
    mdp
}

pub fn taxi_start() -> StartStates {
    StartStates::UniformNonTerminal
}

/// Classic chain of `length` states. Action 1 moves forward (slipping backward
/// with probability `slip_prob`), action 0 moves backward. Reward 1 at the far
/// end: r(s, forward) = 1 for s ≥ length − 2.
pub fn build_chain(length: usize, slip_prob: f64) -> TabularMdp {
    assert!(length >= 2, "chain needs at least 2 states");
    assert!((0.0..1.0).contains(&slip_prob), "slip probability must lie in [0,1)");
    let s_n = length;
    let mut transition = vec![vec![vec![0.0; s_n]; 2]; s_n];
    let mut reward = vec![vec![0.0; 2]; s_n];
    for s in 0..s_n {
        let back = s.saturating_sub(1);
        let fwd = (s + 1).min(s_n - 1);
        transition[s][0][back] = 1.0;
        transition[s][1][fwd] += 1.0 - slip_prob;
        transition[s][1][back] += slip_prob;
        if s >= s_n - 2 {
            reward[s][1] = 1.0;
        }
    }
    TabularMdp { num_states: s_n, num_actions: 2, transition, reward, terminal: vec![false; s_n] }
}

pub fn chain_start() -> StartStates {
    StartStates::Fixed(0)
}

/// A one-state bandit with one arm per entry of `arms` (mean rewards in [0,1]).
pub fn build_bandit(arms: &[f64]) -> TabularMdp {
    assert!(!arms.is_empty());
    assert!(arms.iter().all(|&r| (0.0..=1.0).contains(&r)));
    TabularMdp {
        num_states: 1,
        num_actions: arms.len(),
        transition: vec![vec![vec![1.0]; arms.len()]],
        reward: vec![arms.to_vec()],
        terminal: vec![false],
    }
}

/// A seeded random MDP: exponential-weight transition rows (a fraction
/// `sparsity` of entries zeroed), uniform rewards in [0,1], no terminal states.
pub fn build_random<R: Rng + ?Sized>(s_n: usize, a_n: usize, sparsity: f64, rng: &mut R) -> TabularMdp {
    assert!(s_n >= 1 && a_n >= 1);
    assert!((0.0..1.0).contains(&sparsity));
    let mut transition = vec![vec![vec![0.0; s_n]; a_n]; s_n];
    let mut reward = vec![vec![0.0; a_n]; s_n];
    for s in 0..s_n {
        for a in 0..a_n {
            let mut row = vec![0.0; s_n];
            let keep = rng.gen_range(0..s_n); // always kept, so rows never vanish
            for (s2, w) in row.iter_mut().enumerate() {
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                let mass = -u.ln();
                if s2 == keep || rng.gen::<f64>() >= sparsity {
                    *w = mass;
                }
            }
            let total: f64 = row.iter().sum();
            for w in row.iter_mut() {
                *w /= total;
            }
            transition[s][a] = row;
            reward[s][a] = rng.gen();
        }
    }
    TabularMdp { num_states: s_n, num_actions: a_n, transition, reward, terminal: vec![false; s_n] }
}

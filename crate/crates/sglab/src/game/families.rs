//! Seed-deterministic game generators and small named fixtures. These back
//! the `gen` CLI command and most tests.

use rand::Rng;

use super::{
    DiscountedGame, FiniteHorizonGame, JointIndexer, NonstationaryJointPolicy, PolicyCell,
    ProductPolicy, StationaryJointPolicy, TurnBasedAnnotation,
};
use crate::rng::{seed_rng, ChaCha8Rng};

fn random_dist(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Dense uniform-random finite-horizon game.
pub fn random_finite_game(
    num_states: usize,
    num_players: usize,
    action_counts: &[usize],
    horizon: usize,
    seed: u64,
) -> FiniteHorizonGame {
    let mut rng = seed_rng(seed);
    let na: usize = action_counts.iter().product();
    let transitions = (0..horizon)
        .map(|_| {
            (0..num_states)
                .map(|_| (0..na).map(|_| random_dist(num_states, &mut rng)).collect())
                .collect()
        })
        .collect();
    let rewards = (0..num_players)
        .map(|_| {
            (0..horizon)
                .map(|_| {
                    (0..num_states)
                        .map(|_| (0..na).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    FiniteHorizonGame {
        num_players,
        num_states,
        action_counts: action_counts.to_vec(),
        horizon,
        mu: random_dist(num_states, &mut rng),
        transitions,
        rewards,
    }
}

/// Dense uniform-random discounted game.
pub fn random_discounted_game(
    num_states: usize,
    num_players: usize,
    action_counts: &[usize],
    gamma: f64,
    seed: u64,
) -> DiscountedGame {
    let mut rng = seed_rng(seed);
    let na: usize = action_counts.iter().product();
    let transitions = (0..num_states)
        .map(|_| (0..na).map(|_| random_dist(num_states, &mut rng)).collect())
        .collect();
    let rewards = (0..num_players)
        .map(|_| {
            (0..num_states)
                .map(|_| (0..na).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                .collect()
        })
        .collect();
    DiscountedGame {
        num_players,
        num_states,
        action_counts: action_counts.to_vec(),
        gamma,
        mu: random_dist(num_states, &mut rng),
        transitions,
        rewards,
    }
}

/// Finite-horizon game whose states form layers: state `s` mostly moves to
/// `s + 1` (absorbing at the end), with action-dependent leakage.
pub fn layered_chain_game(
    num_states: usize,
    num_players: usize,
    action_counts: &[usize],
    horizon: usize,
    seed: u64,
) -> FiniteHorizonGame {
    let mut game = random_finite_game(num_states, num_players, action_counts, horizon, seed);
    let mut rng = seed_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let na = game.num_joint_actions();
    for h in 0..horizon {
        for s in 0..num_states {
            let next = (s + 1).min(num_states - 1);
            for a in 0..na {
                let mut row = vec![0.0; num_states];
                let leak = 0.1 * rng.gen::<f64>();
                row[next] = 1.0 - leak;
                let other = rng.gen_range(0..num_states);
                row[other] += leak;
                game.transitions[h][s][a] = row;
            }
        }
    }
    game.mu = vec![0.0; num_states];
    game.mu[0] = 1.0;
    game
}

/// Random turn-based discounted game with binary actions.
pub fn random_turn_based_game(
    num_states: usize,
    num_players: usize,
    gamma: f64,
    seed: u64,
) -> (DiscountedGame, TurnBasedAnnotation) {
    let mut rng = seed_rng(seed);
    let action_counts = vec![2; num_players];
    let ix = JointIndexer::new(&action_counts);
    let na = ix.num_profiles();
    let controller: Vec<usize> = (0..num_states).map(|_| rng.gen_range(0..num_players)).collect();
    // per (state, controller action): one row and one reward vector
    let mut transitions = vec![vec![vec![0.0; num_states]; na]; num_states];
    let mut rewards = vec![vec![vec![0.0; na]; num_states]; num_players];
    for s in 0..num_states {
        for ca in 0..2 {
            let row = random_dist(num_states, &mut rng);
            let rs: Vec<f64> = (0..num_players).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            for a in 0..na {
                if ix.player_action(a, controller[s]) != ca {
                    continue;
                }
                transitions[s][a] = row.clone();
                for i in 0..num_players {
                    rewards[i][s][a] = rs[i];
                }
            }
        }
    }
    let game = DiscountedGame {
        num_players,
        num_states,
        action_counts,
        gamma,
        mu: random_dist(num_states, &mut rng),
        transitions,
        rewards,
    };
    (game, TurnBasedAnnotation { controller, sink: None })
}

/// Random stationary joint policy.
pub fn random_stationary_policy(game: &DiscountedGame, seed: u64) -> StationaryJointPolicy {
    let mut rng = seed_rng(seed);
    let na = game.num_joint_actions();
    StationaryJointPolicy {
        dist: (0..game.num_states).map(|_| random_dist(na, &mut rng)).collect(),
    }
}

/// Random product policy.
pub fn random_product_policy(game: &DiscountedGame, seed: u64) -> ProductPolicy {
    let mut rng = seed_rng(seed);
    ProductPolicy {
        per_player: game
            .action_counts
            .iter()
            .map(|&n| (0..game.num_states).map(|_| random_dist(n, &mut rng)).collect())
            .collect(),
    }
}

/// Random nonstationary joint policy with dense cells.
pub fn random_nonstationary_policy(
    game: &FiniteHorizonGame,
    seed: u64,
) -> NonstationaryJointPolicy {
    let mut rng = seed_rng(seed);
    let na = game.num_joint_actions();
    NonstationaryJointPolicy {
        horizon: game.horizon,
        num_states: game.num_states,
        action_counts: game.action_counts.clone(),
        cells: (0..game.horizon)
            .map(|_| {
                (0..game.num_states)
                    .map(|_| PolicyCell {
                        entries: random_dist(na, &mut rng).into_iter().enumerate().collect(),
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Two states, one player with one action, H = 2; deterministically walks
/// `0 -> 1` and stays. Reward 1 at state 1.
pub fn two_state_chain() -> FiniteHorizonGame {
    FiniteHorizonGame {
        num_players: 1,
        num_states: 2,
        action_counts: vec![1],
        horizon: 2,
        mu: vec![1.0, 0.0],
        transitions: vec![
            vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
            vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
        ],
        rewards: vec![vec![vec![vec![0.0], vec![1.0]], vec![vec![0.0], vec![1.0]]]],
    }
}

/// Matching pennies as a 1-state, horizon-1 game: player 1 gets +1 when the
/// actions match and -1 otherwise; player 2 gets the negation.
pub fn matching_pennies() -> FiniteHorizonGame {
    let ix = JointIndexer::new(&[2, 2]);
    let mut r1 = vec![0.0; 4];
    let mut r2 = vec![0.0; 4];
    for a in 0..4 {
        let acts = ix.split(a);
        let m = if acts[0] == acts[1] { 1.0 } else { -1.0 };
        r1[a] = m;
        r2[a] = -m;
    }
    FiniteHorizonGame {
        num_players: 2,
        num_states: 1,
        action_counts: vec![2, 2],
        horizon: 1,
        mu: vec![1.0],
        transitions: vec![vec![vec![vec![1.0]; 4]]],
        rewards: vec![vec![vec![r1]], vec![vec![r2]]],
    }
}

/// Single-state, single-player game with two actions paying 0 and 1, H = 2.
pub fn reward_equals_action_game() -> FiniteHorizonGame {
    FiniteHorizonGame {
        num_players: 1,
        num_states: 1,
        action_counts: vec![2],
        horizon: 2,
        mu: vec![1.0],
        transitions: vec![vec![vec![vec![1.0], vec![1.0]]], vec![vec![vec![1.0], vec![1.0]]]],
        rewards: vec![vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]]],
    }
}

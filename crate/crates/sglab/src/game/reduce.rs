use serde::{Deserialize, Serialize};

use super::{DiscountedGame, FiniteHorizonGame, NonstationaryJointPolicy, PolicyCell};
use crate::{Error, Result};

/// Finite-horizon view of a discounted game: horizon
/// `H = ceil(ln(1/eps) / (1 - gamma))` and step-`h` rewards scaled by
/// `gamma^(h-1)`, so that truncating any policy after `H` steps changes the
/// unnormalized value by at most `eps / (1 - gamma)`.
///
/// A policy for the view specifies play for steps 1..H only; when replayed
/// on the discounted game, play after step H is taken to be uniform, which
/// the same bound absorbs.
pub fn discounted_to_finite(game: &DiscountedGame, epsilon: f64) -> Result<FiniteHorizonGame> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation accuracy must lie in (0, 1), got {epsilon}"
        )));
    }
    let horizon = ((1.0 / epsilon).ln() / (1.0 - game.gamma)).ceil() as usize;
    let horizon = horizon.max(1);
    let transitions = vec![game.transitions.clone(); horizon];
    let rewards = (0..game.num_players)
        .map(|i| {
            (0..horizon)
                .map(|h| {
                    let scale = game.gamma.powi(h as i32);
                    game.rewards[i]
                        .iter()
                        .map(|row| row.iter().map(|r| scale * r).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(FiniteHorizonGame {
        num_players: game.num_players,
        num_states: game.num_states,
        action_counts: game.action_counts.clone(),
        horizon,
        mu: game.mu.clone(),
        transitions,
        rewards,
    })
}

/// Set of `(step, state)` pairs the learner considers well visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitedSet {
    pub horizon: usize,
    pub num_states: usize,
    flags: Vec<Vec<bool>>,
}

impl VisitedSet {
    pub fn empty(horizon: usize, num_states: usize) -> Self {
        Self { horizon, num_states, flags: vec![vec![false; num_states]; horizon] }
    }

    pub fn full(horizon: usize, num_states: usize) -> Self {
        Self { horizon, num_states, flags: vec![vec![true; num_states]; horizon] }
    }

    /// `h` is 0-based here and everywhere in code.
    pub fn contains(&self, h: usize, s: usize) -> bool {
        self.flags[h][s]
    }

    pub fn insert(&mut self, h: usize, s: usize) -> bool {
        let fresh = !self.flags[h][s];
        self.flags[h][s] = true;
        fresh
    }

    pub fn len(&self) -> usize {
        self.flags.iter().flatten().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_superset_of(&self, other: &VisitedSet) -> bool {
        self.flags
            .iter()
            .flatten()
            .zip(other.flags.iter().flatten())
            .all(|(a, b)| *a || !*b)
    }
}

/// Optimistic completion of a partially known game: pairs outside the
/// visited set pay every player the maximum reward 1 and fall into an
/// absorbing bonus state (index `S`, appended last) that keeps paying 1.
/// Inside the visited set the tables match the input game.
pub fn build_optimistic_game(game: &FiniteHorizonGame, visited: &VisitedSet) -> FiniteHorizonGame {
    let n = game.num_states;
    let na = game.num_joint_actions();
    let bonus = n;
    let mut transitions = Vec::with_capacity(game.horizon);
    let mut rewards = vec![Vec::with_capacity(game.horizon); game.num_players];
    for h in 0..game.horizon {
        let mut trow = Vec::with_capacity(n + 1);
        let mut rrows: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(n + 1); game.num_players];
        for s in 0..n {
            if visited.contains(h, s) {
                let mut per_action = Vec::with_capacity(na);
                for a in 0..na {
                    let mut row = game.transitions[h][s][a].clone();
                    row.push(0.0);
                    per_action.push(row);
                }
                trow.push(per_action);
                for i in 0..game.num_players {
                    rrows[i].push(game.rewards[i][h][s].clone());
                }
            } else {
                let mut to_bonus = vec![0.0; n + 1];
                to_bonus[bonus] = 1.0;
                trow.push(vec![to_bonus; na]);
                for rrow in rrows.iter_mut() {
                    rrow.push(vec![1.0; na]);
                }
            }
        }
        // bonus state: absorbing, reward 1 for everyone
        let mut stay = vec![0.0; n + 1];
        stay[bonus] = 1.0;
        trow.push(vec![stay; na]);
        for rrow in rrows.iter_mut() {
            rrow.push(vec![1.0; na]);
        }
        transitions.push(trow);
        for (i, rrow) in rrows.into_iter().enumerate() {
            rewards[i].push(rrow);
        }
    }
    FiniteHorizonGame {
        num_players: game.num_players,
        num_states: n + 1,
        action_counts: game.action_counts.clone(),
        horizon: game.horizon,
        mu: {
            let mut mu = game.mu.clone();
            mu.push(0.0);
            mu
        },
        transitions,
        rewards,
    }
}

/// Policy extended with uniform cells for appended states (used to evaluate
/// a policy for the original game on its optimistic completion).
pub fn extend_policy(
    policy: &NonstationaryJointPolicy,
    num_states: usize,
) -> NonstationaryJointPolicy {
    assert!(num_states >= policy.num_states);
    let n: usize = policy.action_counts.iter().product();
    let mut cells = policy.cells.clone();
    for row in cells.iter_mut() {
        while row.len() < num_states {
            row.push(PolicyCell::uniform(n));
        }
    }
    NonstationaryJointPolicy {
        horizon: policy.horizon,
        num_states,
        action_counts: policy.action_counts.clone(),
        cells,
    }
}

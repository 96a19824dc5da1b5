use nalgebra::{DMatrix, DVector};

use super::{
    DiscountedGame, FiniteHorizonGame, NonstationaryJointPolicy, PolicyCell,
    StationaryJointPolicy,
};
use crate::{Error, Result};

/// Deterministic policy and its values, both indexed `[h][s]` (or `[s]`
/// in the stationary case packed as one row).
pub type DeterministicResponse = (Vec<Vec<usize>>, Vec<Vec<f64>>);

/// Problem size above which discounted policy evaluation switches from a
/// direct linear solve to fixed-point iteration.
const LINEAR_SOLVE_LIMIT: usize = 10_000;
const ITER_RESIDUAL: f64 = 1e-12;

/// Finite-horizon value tables `values[i][h][s]` for `h = 1..H` (index
/// `h-1`); the step-`H+1` values are identically zero and not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteValues {
    pub values: Vec<Vec<Vec<f64>>>,
}

impl FiniteValues {
    pub fn at_mu(&self, game: &FiniteHorizonGame, player: usize) -> f64 {
        self.values[player][0]
            .iter()
            .zip(&game.mu)
            .map(|(v, m)| v * m)
            .sum()
    }
}

/// Discounted value tables `values[i][s]`, in the normalized convention
/// `V = (1 - gamma) * E[sum gamma^(h-1) r_h]` so that values stay in
/// `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedValues {
    pub values: Vec<Vec<f64>>,
}

impl DiscountedValues {
    pub fn at_mu(&self, game: &DiscountedGame, player: usize) -> f64 {
        self.values[player].iter().zip(&game.mu).map(|(v, m)| v * m).sum()
    }
}

fn expected_next(row: &[f64], v: &[f64]) -> f64 {
    row.iter().zip(v).map(|(p, vv)| p * vv).sum()
}

/// Exact finite-horizon policy evaluation by backward recursion:
/// `V_{i,h}(s) = sum_a pi_h(a|s) [r_{i,h}(s,a) + E_{s'} V_{i,h+1}(s')]`.
pub fn exact_value_finite(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
) -> Result<FiniteValues> {
    check_policy_shape(game, policy)?;
    let m = game.num_players;
    let mut values = vec![vec![vec![0.0; game.num_states]; game.horizon]; m];
    let mut next = vec![vec![0.0; game.num_states]; m];
    for h in (0..game.horizon).rev() {
        for s in 0..game.num_states {
            let cell = &policy.cells[h][s];
            for i in 0..m {
                let mut v = 0.0;
                for &(a, w) in &cell.entries {
                    v += w
                        * (game.rewards[i][h][s][a]
                            + expected_next(&game.transitions[h][s][a], &next[i]));
                }
                values[i][h][s] = v;
            }
        }
        for i in 0..m {
            next[i].copy_from_slice(&values[i][h]);
        }
    }
    Ok(FiniteValues { values })
}

fn check_policy_shape(game: &FiniteHorizonGame, policy: &NonstationaryJointPolicy) -> Result<()> {
    if policy.horizon != game.horizon
        || policy.num_states != game.num_states
        || policy.action_counts != game.action_counts
    {
        return Err(Error::ShapeMismatch(format!(
            "policy ({}h, {}s, {:?}) vs game ({}h, {}s, {:?})",
            policy.horizon,
            policy.num_states,
            policy.action_counts,
            game.horizon,
            game.num_states,
            game.action_counts
        )));
    }
    for h in 0..game.horizon {
        for s in 0..game.num_states {
            if policy.cells[h][s].entries.is_empty() {
                return Err(Error::InvalidPolicy(format!("empty cell at (h={h}, s={s})")));
            }
        }
    }
    Ok(())
}

/// State-to-state transition matrix and mean rewards induced by a
/// stationary joint policy.
fn induced_chain(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = game.num_states;
    let na = game.num_joint_actions();
    let mut p = vec![vec![0.0; n]; n];
    let mut r = vec![vec![0.0; n]; game.num_players];
    for s in 0..n {
        for a in 0..na {
            let w = policy.dist[s][a];
            if w == 0.0 {
                continue;
            }
            for s2 in 0..n {
                p[s][s2] += w * game.transitions[s][a][s2];
            }
            for i in 0..game.num_players {
                r[i][s] += w * game.rewards[i][s][a];
            }
        }
    }
    (p, r)
}

/// Solves `(I - gamma P) v = (1 - gamma) r` for one player.
fn solve_discounted(p: &[Vec<f64>], r: &[f64], gamma: f64) -> Vec<f64> {
    let n = r.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        eye - gamma * p[i][j]
    });
    let b = DVector::from_fn(n, |i, _| (1.0 - gamma) * r[i]);
    let lu = a.lu();
    lu.solve(&b)
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|| iterate_discounted(p, r, gamma))
}

fn iterate_discounted(p: &[Vec<f64>], r: &[f64], gamma: f64) -> Vec<f64> {
    let n = r.len();
    let mut v = vec![0.0; n];
    let max_iters = ((ITER_RESIDUAL.ln() / gamma.max(1e-9).ln()).ceil() as usize).max(64) + 64;
    for _ in 0..max_iters {
        let mut delta: f64 = 0.0;
        let mut next = vec![0.0; n];
        for s in 0..n {
            next[s] = (1.0 - gamma) * r[s] + gamma * expected_next(&p[s], &v);
            delta = delta.max((next[s] - v[s]).abs());
        }
        v = next;
        if delta < ITER_RESIDUAL {
            break;
        }
    }
    v
}

/// Exact discounted policy evaluation; direct linear solve for small
/// problems, fixed-point iteration to residual 1e-12 otherwise.
pub fn exact_value_discounted(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
) -> Result<DiscountedValues> {
    if policy.dist.len() != game.num_states {
        return Err(Error::ShapeMismatch("policy state count != game".into()));
    }
    let (p, r) = induced_chain(game, policy);
    let small = game.num_states * game.num_joint_actions() <= LINEAR_SOLVE_LIMIT;
    let values = (0..game.num_players)
        .map(|i| {
            if small {
                solve_discounted(&p, &r[i], game.gamma)
            } else {
                iterate_discounted(&p, &r[i], game.gamma)
            }
        })
        .collect();
    Ok(DiscountedValues { values })
}

/// Finite-horizon state-action values
/// `Q_{i,h}(s, a) = r_{i,h}(s, a) + E_{s'} V_{i,h+1}(s')`, indexed
/// `[i][h][s][flat action]`.
pub fn q_values_finite(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    let v = exact_value_finite(game, policy)?;
    let na = game.num_joint_actions();
    let zeros = vec![0.0; game.num_states];
    Ok((0..game.num_players)
        .map(|i| {
            (0..game.horizon)
                .map(|h| {
                    let next = if h + 1 < game.horizon { &v.values[i][h + 1] } else { &zeros };
                    (0..game.num_states)
                        .map(|s| {
                            (0..na)
                                .map(|a| {
                                    game.rewards[i][h][s][a]
                                        + expected_next(&game.transitions[h][s][a], next)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// Unnormalized discounted values `E[sum gamma^(h-1) r_h] = V / (1 - gamma)`.
pub fn exact_value_unnormalized(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
) -> Result<DiscountedValues> {
    let mut v = exact_value_discounted(game, policy)?;
    for row in &mut v.values {
        for x in row.iter_mut() {
            *x /= 1.0 - game.gamma;
        }
    }
    Ok(v)
}

/// Normalized state-action values
/// `Q_i(s, a) = (1 - gamma) r_i(s, a) + gamma E_{s'} V_i(s')`.
pub fn q_values_discounted(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let v = exact_value_discounted(game, policy)?;
    let na = game.num_joint_actions();
    Ok((0..game.num_players)
        .map(|i| {
            (0..game.num_states)
                .map(|s| {
                    (0..na)
                        .map(|a| {
                            (1.0 - game.gamma) * game.rewards[i][s][a]
                                + game.gamma
                                    * expected_next(&game.transitions[s][a], &v.values[i])
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// Deterministic best response of `player` against the joint policy's
/// marginal over the others, by backward induction. Ties break to the
/// lowest action index. Returns `(actions[h][s], values[h][s])`.
pub fn best_response_finite(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
    player: usize,
) -> Result<DeterministicResponse> {
    check_policy_shape(game, policy)?;
    let ix = game.indexer();
    let marginals = policy.marginal_excluding(player);
    let n_own = game.action_counts[player];
    let mut actions = vec![vec![0usize; game.num_states]; game.horizon];
    let mut values = vec![vec![0.0; game.num_states]; game.horizon];
    let mut next = vec![0.0; game.num_states];
    for h in (0..game.horizon).rev() {
        for s in 0..game.num_states {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a_own in 0..n_own {
                let mut q = 0.0;
                for (a_rest, w) in marginals[h][s].iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let flat = ix.combine(player, a_own, a_rest);
                    q += w
                        * (game.rewards[player][h][s][flat]
                            + expected_next(&game.transitions[h][s][flat], &next));
                }
                if q > best {
                    best = q;
                    best_a = a_own;
                }
            }
            values[h][s] = best;
            actions[h][s] = best_a;
        }
        next.copy_from_slice(&values[h]);
    }
    Ok((actions, values))
}

/// Joint policy where `player` plays the given deterministic actions and
/// everyone else follows the original policy's marginal.
pub fn fix_player_action(
    policy: &NonstationaryJointPolicy,
    player: usize,
    actions: &[Vec<usize>],
) -> NonstationaryJointPolicy {
    let ix = policy.indexer();
    let marginals = policy.marginal_excluding(player);
    let cells = (0..policy.horizon)
        .map(|h| {
            (0..policy.num_states)
                .map(|s| PolicyCell {
                    entries: marginals[h][s]
                        .iter()
                        .enumerate()
                        .filter(|(_, w)| **w > 0.0)
                        .map(|(a_rest, w)| (ix.combine(player, actions[h][s], a_rest), *w))
                        .collect(),
                })
                .collect()
        })
        .collect();
    NonstationaryJointPolicy {
        horizon: policy.horizon,
        num_states: policy.num_states,
        action_counts: policy.action_counts.clone(),
        cells,
    }
}

/// Best response in a discounted game by policy iteration with exact
/// evaluation; terminates at the exact optimum. Returns
/// `(actions[s], values[s])` for `player`, values normalized.
pub fn best_response_discounted(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
    player: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let ix = game.indexer();
    let rest = ix.without_player(player);
    let n_rest = rest.num_profiles();
    let n_own = game.action_counts[player];
    let n = game.num_states;
    // induced MDP for `player`: rows/rewards per (s, own action)
    let mut p_own = vec![vec![vec![0.0; n]; n_own]; n];
    let mut r_own = vec![vec![0.0; n_own]; n];
    for s in 0..n {
        let marg = policy.marginal_excluding(&ix, player, s);
        for a_own in 0..n_own {
            for a_rest in 0..n_rest {
                let w = marg[a_rest];
                if w == 0.0 {
                    continue;
                }
                let flat = ix.combine(player, a_own, a_rest);
                r_own[s][a_own] += w * game.rewards[player][s][flat];
                for s2 in 0..n {
                    p_own[s][a_own][s2] += w * game.transitions[s][flat][s2];
                }
            }
        }
    }
    let mut actions = vec![0usize; n];
    let cap = (n * n_own).max(16) * 4;
    for _ in 0..cap {
        // exact evaluation of the current deterministic policy
        let p: Vec<Vec<f64>> = (0..n).map(|s| p_own[s][actions[s]].clone()).collect();
        let r: Vec<f64> = (0..n).map(|s| r_own[s][actions[s]]).collect();
        let v = if n * n_own <= LINEAR_SOLVE_LIMIT {
            solve_discounted(&p, &r, game.gamma)
        } else {
            iterate_discounted(&p, &r, game.gamma)
        };
        // greedy improvement, lowest index wins ties
        let mut improved = false;
        let mut next_actions = actions.clone();
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..n_own {
                let q = (1.0 - game.gamma) * r_own[s][a]
                    + game.gamma * expected_next(&p_own[s][a], &v);
                if q > best + 1e-13 {
                    best = q;
                    best_a = a;
                }
            }
            if best_a != actions[s] {
                let q_cur = (1.0 - game.gamma) * r_own[s][actions[s]]
                    + game.gamma * expected_next(&p_own[s][actions[s]], &v);
                if best > q_cur + 1e-13 {
                    next_actions[s] = best_a;
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok((actions, v));
        }
        actions = next_actions;
    }
    Err(Error::InvalidGame("policy iteration failed to converge".into()))
}

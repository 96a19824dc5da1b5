use serde::{Deserialize, Serialize};

use super::{check_distribution, JointIndexer, Violation};
use crate::game::NonstationaryJointPolicy;
use crate::rng::ChaCha8Rng;

/// A finite-horizon tabular stochastic game.
///
/// Transitions and rewards are step-indexed: `transitions[h][s][a]` is a
/// probability vector over next states and `rewards[i][h][s][a]` is player
/// `i`'s reward in `[-1, 1]`, where `a` is a flat joint-action index
/// (row-major over `(a_1, ..., a_m)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteHorizonGame {
    #[serde(rename = "players")]
    pub num_players: usize,
    #[serde(rename = "states")]
    pub num_states: usize,
    #[serde(rename = "actions")]
    pub action_counts: Vec<usize>,
    pub horizon: usize,
    pub mu: Vec<f64>,
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
    pub rewards: Vec<Vec<Vec<Vec<f64>>>>,
}

impl FiniteHorizonGame {
    pub fn indexer(&self) -> JointIndexer {
        JointIndexer::new(&self.action_counts)
    }

    pub fn num_joint_actions(&self) -> usize {
        self.action_counts.iter().product()
    }

    /// All invariant violations: stochastic transition rows, rewards in
    /// `[-1, 1]`, a normalized initial distribution, and consistent shapes.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let na = self.num_joint_actions();
        if self.num_players == 0 || self.action_counts.len() != self.num_players {
            out.push(Violation {
                location: "actions".into(),
                message: format!(
                    "expected {} per-player action counts, found {}",
                    self.num_players,
                    self.action_counts.len()
                ),
            });
            return out;
        }
        if self.horizon == 0 {
            out.push(Violation { location: "horizon".into(), message: "horizon is 0".into() });
        }
        if self.mu.len() != self.num_states {
            out.push(Violation {
                location: "mu".into(),
                message: format!("length {} != {} states", self.mu.len(), self.num_states),
            });
        } else {
            check_distribution(&self.mu, 1e-9, "mu", &mut out);
        }
        if self.transitions.len() != self.horizon || self.rewards.len() != self.num_players {
            out.push(Violation {
                location: "tables".into(),
                message: "transition/reward tables do not match horizon/player counts".into(),
            });
            return out;
        }
        for h in 0..self.horizon {
            if self.transitions[h].len() != self.num_states {
                out.push(Violation {
                    location: format!("transitions[h={h}]"),
                    message: "missing states".into(),
                });
                continue;
            }
            for s in 0..self.num_states {
                if self.transitions[h][s].len() != na {
                    out.push(Violation {
                        location: format!("transitions[h={h}][s={s}]"),
                        message: format!("expected {na} joint actions"),
                    });
                    continue;
                }
                for a in 0..na {
                    let row = &self.transitions[h][s][a];
                    if row.len() != self.num_states {
                        out.push(Violation {
                            location: format!("transitions[h={h}][s={s}][a={a}]"),
                            message: "row length != state count".into(),
                        });
                        continue;
                    }
                    check_distribution(
                        row,
                        1e-9,
                        &format!("transitions[h={h}][s={s}][a={a}]"),
                        &mut out,
                    );
                }
            }
        }
        for i in 0..self.num_players {
            for h in 0..self.horizon {
                for s in 0..self.num_states {
                    for a in 0..na {
                        let r = self.rewards[i][h][s][a];
                        if !(-1.0..=1.0).contains(&r) {
                            out.push(Violation {
                                location: format!("rewards[i={i}][h={h}][s={s}][a={a}]"),
                                message: format!("reward {r} outside [-1, 1]"),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Reward vector (one entry per player) at `(h, s, flat action)`.
    pub fn reward_vector(&self, h: usize, s: usize, a: usize) -> Vec<f64> {
        (0..self.num_players).map(|i| self.rewards[i][h][s][a]).collect()
    }
}

/// One step of a sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajStep {
    pub state: usize,
    /// Per-player actions.
    pub actions: Vec<usize>,
    /// Per-player rewards.
    pub rewards: Vec<f64>,
}

/// A length-`H` trajectory `(s_h, a_h, r_h)` for `h = 1..H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajStep>,
}

impl Trajectory {
    /// Violations of the trajectory contract against a game: exact length
    /// `H` and rewards equal to the game's reward table entries.
    pub fn validate(&self, game: &FiniteHorizonGame) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.steps.len() != game.horizon {
            out.push(Violation {
                location: "trajectory".into(),
                message: format!("length {} != horizon {}", self.steps.len(), game.horizon),
            });
            return out;
        }
        let ix = game.indexer();
        for (h, step) in self.steps.iter().enumerate() {
            let a = ix.flatten(&step.actions);
            let expect = game.reward_vector(h, step.state, a);
            if step.rewards != expect {
                out.push(Violation {
                    location: format!("trajectory[h={h}]"),
                    message: "rewards do not match the reward table".into(),
                });
            }
        }
        out
    }
}

/// Draw one trajectory: `s_1 ~ mu`, `a_h` from the policy's `(h, s_h)`
/// mixture, `s_{h+1} ~ P_h(. | s_h, a_h)`, rewards copied from the table.
pub fn sample_trajectory(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
    rng: &mut ChaCha8Rng,
) -> Trajectory {
    let ix = game.indexer();
    let mut steps = Vec::with_capacity(game.horizon);
    let mut s = crate::rng::sample_index(&game.mu, rng);
    for h in 0..game.horizon {
        let flat = policy.cells[h][s].sample(rng);
        let rewards = game.reward_vector(h, s, flat);
        steps.push(TrajStep { state: s, actions: ix.split(flat), rewards });
        s = crate::rng::sample_index(&game.transitions[h][s][flat], rng);
    }
    Trajectory { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::families::{random_finite_game, two_state_chain};
    use crate::rng::seed_rng;

    #[test]
    fn well_formed_game_validates() {
        let game = two_state_chain();
        assert!(game.validate().is_empty());
    }

    #[test]
    fn bad_row_and_reward_are_reported() {
        let mut game = two_state_chain();
        game.transitions[0][0][0][1] -= 0.1;
        game.rewards[0][0][1][0] = 1.5;
        let v = game.validate();
        assert_eq!(v.len(), 2);
        assert!(v[0].location.contains("transitions[h=0][s=0][a=0]"));
        assert!(v[1].location.contains("rewards"));
    }

    #[test]
    fn deterministic_chain_has_unique_trajectory() {
        let game = two_state_chain();
        let policy = NonstationaryJointPolicy::uniform_for(&game);
        // single action per player: the policy is forced
        let mut rng = seed_rng(0);
        let t = sample_trajectory(&game, &policy, &mut rng);
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.steps[0].state, 0);
        assert_eq!(t.steps[1].state, 1);
        assert!(t.validate(&game).is_empty());
    }

    #[test]
    fn seeded_sampling_replays() {
        let game = random_finite_game(3, 2, &[2, 2], 3, 11);
        let policy = NonstationaryJointPolicy::uniform_for(&game);
        let a = sample_trajectory(&game, &policy, &mut seed_rng(5));
        let b = sample_trajectory(&game, &policy, &mut seed_rng(5));
        assert_eq!(a, b);
    }

    #[test]
    fn initial_state_frequency_matches_mu() {
        let mut game = random_finite_game(3, 1, &[2], 2, 3);
        game.mu = vec![0.5, 0.3, 0.2];
        let policy = NonstationaryJointPolicy::uniform_for(&game);
        let mut rng = seed_rng(42);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let t = sample_trajectory(&game, &policy, &mut rng);
            counts[t.steps[0].state] += 1;
        }
        let l1: f64 = counts
            .iter()
            .zip(&game.mu)
            .map(|(c, m)| (*c as f64 / n as f64 - m).abs())
            .sum();
        assert!(l1 <= 0.02, "L1 distance {l1}");
    }
}

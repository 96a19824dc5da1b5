use serde::{Deserialize, Serialize};

use super::{check_distribution, JointIndexer, Violation};

/// An infinite-horizon discounted tabular stochastic game. Tables are
/// step-independent: `transitions[s][a]` and `rewards[i][s][a]` with `a` a
/// flat joint-action index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountedGame {
    #[serde(rename = "players")]
    pub num_players: usize,
    #[serde(rename = "states")]
    pub num_states: usize,
    #[serde(rename = "actions")]
    pub action_counts: Vec<usize>,
    pub gamma: f64,
    pub mu: Vec<f64>,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<Vec<f64>>>,
}

impl DiscountedGame {
    pub fn indexer(&self) -> JointIndexer {
        JointIndexer::new(&self.action_counts)
    }

    pub fn num_joint_actions(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let na = self.num_joint_actions();
        if self.num_players == 0 || self.action_counts.len() != self.num_players {
            out.push(Violation {
                location: "actions".into(),
                message: "per-player action counts do not match player count".into(),
            });
            return out;
        }
        if !(0.0..1.0).contains(&self.gamma) {
            out.push(Violation {
                location: "gamma".into(),
                message: format!("discount {} outside [0, 1)", self.gamma),
            });
        }
        if self.mu.len() != self.num_states {
            out.push(Violation { location: "mu".into(), message: "length mismatch".into() });
        } else {
            check_distribution(&self.mu, 1e-9, "mu", &mut out);
        }
        if self.transitions.len() != self.num_states || self.rewards.len() != self.num_players {
            out.push(Violation {
                location: "tables".into(),
                message: "table shapes do not match state/player counts".into(),
            });
            return out;
        }
        for s in 0..self.num_states {
            if self.transitions[s].len() != na {
                out.push(Violation {
                    location: format!("transitions[s={s}]"),
                    message: format!("expected {na} joint actions"),
                });
                continue;
            }
            for a in 0..na {
                let row = &self.transitions[s][a];
                if row.len() != self.num_states {
                    out.push(Violation {
                        location: format!("transitions[s={s}][a={a}]"),
                        message: "row length != state count".into(),
                    });
                    continue;
                }
                check_distribution(row, 1e-9, &format!("transitions[s={s}][a={a}]"), &mut out);
            }
        }
        for i in 0..self.num_players {
            for s in 0..self.num_states {
                for a in 0..na {
                    let r = self.rewards[i][s][a];
                    if !(-1.0..=1.0).contains(&r) {
                        out.push(Violation {
                            location: format!("rewards[i={i}][s={s}][a={a}]"),
                            message: format!("reward {r} outside [-1, 1]"),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn reward_vector(&self, s: usize, a: usize) -> Vec<f64> {
        (0..self.num_players).map(|i| self.rewards[i][s][a]).collect()
    }
}

/// Marks a game as turn-based: a single controller per state whose action
/// alone determines the transition and all rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnBasedAnnotation {
    /// `controller[s]` = the player whose action matters at `s`.
    pub controller: Vec<usize>,
    /// Absorbing zero-reward state, when the game designates one.
    pub sink: Option<usize>,
}

impl TurnBasedAnnotation {
    /// Checks by enumeration that every pair of joint actions agreeing on
    /// the controller's action induces identical transition rows and reward
    /// vectors, and that any declared sink is absorbing with zero rewards.
    pub fn validate(&self, game: &DiscountedGame) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.controller.len() != game.num_states {
            out.push(Violation {
                location: "controller".into(),
                message: "length != state count".into(),
            });
            return out;
        }
        let ix = game.indexer();
        let na = game.num_joint_actions();
        for s in 0..game.num_states {
            let c = self.controller[s];
            if c >= game.num_players {
                out.push(Violation {
                    location: format!("controller[s={s}]"),
                    message: format!("player {c} out of range"),
                });
                continue;
            }
            for a in 0..na {
                for b in (a + 1)..na {
                    if ix.player_action(a, c) != ix.player_action(b, c) {
                        continue;
                    }
                    if game.transitions[s][a] != game.transitions[s][b] {
                        out.push(Violation {
                            location: format!("transitions[s={s}]"),
                            message: format!(
                                "profiles {a} and {b} agree for the controller but transition differently"
                            ),
                        });
                    }
                    if game.reward_vector(s, a) != game.reward_vector(s, b) {
                        out.push(Violation {
                            location: format!("rewards[s={s}]"),
                            message: format!(
                                "profiles {a} and {b} agree for the controller but pay differently"
                            ),
                        });
                    }
                }
            }
        }
        if let Some(z) = self.sink {
            for a in 0..na {
                if game.transitions[z][a][z] != 1.0 {
                    out.push(Violation {
                        location: format!("sink[s={z}]"),
                        message: "sink is not absorbing".into(),
                    });
                }
                if game.reward_vector(z, a).iter().any(|r| *r != 0.0) {
                    out.push(Violation {
                        location: format!("sink[s={z}]"),
                        message: "sink pays nonzero reward".into(),
                    });
                }
            }
        }
        out
    }

    /// Q-value of the controller of `s` for playing `action`, given values
    /// `v` for the controller. Any joint profile with that controller action
    /// represents the row.
    pub fn controller_q(
        &self,
        game: &DiscountedGame,
        v: &[f64],
        s: usize,
        action: usize,
    ) -> f64 {
        let ix = game.indexer();
        let c = self.controller[s];
        let flat = ix.replace_action(0, c, action);
        let cont: f64 = game.transitions[s][flat]
            .iter()
            .zip(v)
            .map(|(p, vv)| p * vv)
            .sum();
        (1.0 - game.gamma) * game.rewards[c][s][flat] + game.gamma * cont
    }
}

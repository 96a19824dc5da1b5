use serde::{Deserialize, Serialize};

use super::{DiscountedGame, FiniteHorizonGame, JointIndexer, TurnBasedAnnotation, Violation};
use crate::rng::ChaCha8Rng;

/// One `(step, state)` cell of a nonstationary joint policy: a weighted
/// list of flat joint-action profiles. Entries may repeat (learner output
/// keeps profiles in draw order); `merged()` collapses duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCell {
    pub entries: Vec<(usize, f64)>,
}

impl PolicyCell {
    pub fn uniform(num_profiles: usize) -> Self {
        let w = 1.0 / num_profiles as f64;
        Self { entries: (0..num_profiles).map(|a| (a, w)).collect() }
    }

    pub fn point(profile: usize) -> Self {
        Self { entries: vec![(profile, 1.0)] }
    }

    /// Uniform mixture over recorded draws, duplicates kept.
    pub fn from_draws(draws: &[usize]) -> Self {
        let w = 1.0 / draws.len() as f64;
        Self { entries: draws.iter().map(|&a| (a, w)).collect() }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        use rand::Rng;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(a, w) in &self.entries {
            acc += w;
            if u < acc {
                return a;
            }
        }
        self.entries.last().expect("empty policy cell").0
    }

    /// Duplicate profiles merged, sorted by flat index.
    pub fn merged(&self) -> Vec<(usize, f64)> {
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|&(a, _)| a);
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (a, w) in sorted {
            match out.last_mut() {
                Some((b, acc)) if *b == a => *acc += w,
                _ => out.push((a, w)),
            }
        }
        out
    }

    /// Dense distribution over all `num_profiles` flat profiles.
    pub fn dense(&self, num_profiles: usize) -> Vec<f64> {
        let mut d = vec![0.0; num_profiles];
        for &(a, w) in &self.entries {
            d[a] += w;
        }
        d
    }
}

/// Per-`(step, state)` mixture over joint action profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct NonstationaryJointPolicy {
    pub horizon: usize,
    pub num_states: usize,
    pub action_counts: Vec<usize>,
    /// `cells[h][s]`
    pub cells: Vec<Vec<PolicyCell>>,
}

impl NonstationaryJointPolicy {
    pub fn indexer(&self) -> JointIndexer {
        JointIndexer::new(&self.action_counts)
    }

    pub fn uniform(horizon: usize, num_states: usize, action_counts: &[usize]) -> Self {
        let n: usize = action_counts.iter().product();
        Self {
            horizon,
            num_states,
            action_counts: action_counts.to_vec(),
            cells: vec![vec![PolicyCell::uniform(n); num_states]; horizon],
        }
    }

    pub fn uniform_for(game: &FiniteHorizonGame) -> Self {
        Self::uniform(game.horizon, game.num_states, &game.action_counts)
    }

    /// Nonstationary view of a stationary joint policy, repeated `horizon` times.
    pub fn from_stationary(
        stationary: &StationaryJointPolicy,
        horizon: usize,
        action_counts: &[usize],
    ) -> Self {
        let cells: Vec<PolicyCell> = stationary
            .dist
            .iter()
            .map(|row| PolicyCell {
                entries: row
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(a, w)| (a, *w))
                    .collect(),
            })
            .collect();
        Self {
            horizon,
            num_states: stationary.dist.len(),
            action_counts: action_counts.to_vec(),
            cells: vec![cells; horizon],
        }
    }

    /// Weights nonnegative and summing to 1 per cell, valid profile indices,
    /// no empty cells (an empty mixture is an error, not implicit uniform).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n: usize = self.action_counts.iter().product();
        if self.cells.len() != self.horizon {
            out.push(Violation {
                location: "cells".into(),
                message: "cell rows != horizon".into(),
            });
            return out;
        }
        for (h, row) in self.cells.iter().enumerate() {
            if row.len() != self.num_states {
                out.push(Violation {
                    location: format!("cells[h={h}]"),
                    message: "cell row length != state count".into(),
                });
                continue;
            }
            for (s, cell) in row.iter().enumerate() {
                let loc = format!("cells[h={h}][s={s}]");
                if cell.entries.is_empty() {
                    out.push(Violation { location: loc, message: "empty profile list".into() });
                    continue;
                }
                let mut sum = 0.0;
                for &(a, w) in &cell.entries {
                    if a >= n {
                        out.push(Violation {
                            location: loc.clone(),
                            message: format!("profile index {a} out of range {n}"),
                        });
                    }
                    if w < 0.0 {
                        out.push(Violation {
                            location: loc.clone(),
                            message: format!("negative weight {w}"),
                        });
                    }
                    sum += w;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    out.push(Violation {
                        location: loc,
                        message: format!("weights sum to {sum}"),
                    });
                }
            }
        }
        out
    }

    /// Marginal mixture over the other players' profiles at every cell:
    /// `result[h][s]` is dense over the `without_player(i)` index space.
    pub fn marginal_excluding(&self, player: usize) -> Vec<Vec<Vec<f64>>> {
        let ix = self.indexer();
        let rest = ix.without_player(player);
        let n = rest.num_profiles();
        self.cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| {
                        let mut d = vec![0.0; n];
                        for &(a, w) in &cell.entries {
                            d[ix.flat_excluding(a, player)] += w;
                        }
                        d
                    })
                    .collect()
            })
            .collect()
    }
}

/// Stationary joint policy: a dense distribution over flat joint profiles
/// per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryJointPolicy {
    /// `dist[s][flat_profile]`
    pub dist: Vec<Vec<f64>>,
}

impl StationaryJointPolicy {
    pub fn uniform(num_states: usize, num_profiles: usize) -> Self {
        Self { dist: vec![vec![1.0 / num_profiles as f64; num_profiles]; num_states] }
    }

    pub fn validate(&self, game: &DiscountedGame) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.dist.len() != game.num_states {
            out.push(Violation {
                location: "policy".into(),
                message: "state count mismatch".into(),
            });
            return out;
        }
        let n = game.num_joint_actions();
        for (s, row) in self.dist.iter().enumerate() {
            if row.len() != n {
                out.push(Violation {
                    location: format!("policy[s={s}]"),
                    message: "profile count mismatch".into(),
                });
                continue;
            }
            super::check_distribution(row, 1e-9, &format!("policy[s={s}]"), &mut out);
        }
        out
    }

    /// Marginal distribution over the other players' profiles at `s`.
    pub fn marginal_excluding(&self, ix: &JointIndexer, player: usize, s: usize) -> Vec<f64> {
        let rest = ix.without_player(player);
        let mut d = vec![0.0; rest.num_profiles()];
        for (a, w) in self.dist[s].iter().enumerate() {
            d[ix.flat_excluding(a, player)] += w;
        }
        d
    }

    /// Per-player marginal at `s`.
    pub fn player_marginal(&self, ix: &JointIndexer, player: usize, s: usize) -> Vec<f64> {
        let mut d = vec![0.0; ix.counts()[player]];
        for (a, w) in self.dist[s].iter().enumerate() {
            d[ix.player_action(a, player)] += w;
        }
        d
    }
}

/// Product stationary policy: independent per-player distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPolicy {
    /// `per_player[i][s][a_i]`
    pub per_player: Vec<Vec<Vec<f64>>>,
}

impl ProductPolicy {
    pub fn uniform(num_states: usize, action_counts: &[usize]) -> Self {
        Self {
            per_player: action_counts
                .iter()
                .map(|&n| vec![vec![1.0 / n as f64; n]; num_states])
                .collect(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.per_player.first().map_or(0, |p| p.len())
    }

    pub fn to_joint(&self, ix: &JointIndexer) -> StationaryJointPolicy {
        let num_states = self.num_states();
        let n = ix.num_profiles();
        let mut dist = vec![vec![0.0; n]; num_states];
        for s in 0..num_states {
            for a in 0..n {
                let actions = ix.split(a);
                let mut w = 1.0;
                for (i, &ai) in actions.iter().enumerate() {
                    w *= self.per_player[i][s][ai];
                }
                dist[s][a] = w;
            }
        }
        StationaryJointPolicy { dist }
    }
}

/// Stationary policy in either joint or product form. Stage-game gap modes
/// require the product form.
#[derive(Debug, Clone, PartialEq)]
pub enum StationaryPolicy {
    Joint(StationaryJointPolicy),
    Product(ProductPolicy),
}

impl StationaryPolicy {
    pub fn to_joint(&self, ix: &JointIndexer) -> StationaryJointPolicy {
        match self {
            StationaryPolicy::Joint(j) => j.clone(),
            StationaryPolicy::Product(p) => p.to_joint(ix),
        }
    }

    pub fn as_product(&self) -> Option<&ProductPolicy> {
        match self {
            StationaryPolicy::Product(p) => Some(p),
            StationaryPolicy::Joint(_) => None,
        }
    }
}

/// Stationary policy for a binary-action turn-based game: `values[s]` is the
/// probability that the controller of `s` plays action 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnBasedPolicy {
    pub values: Vec<f64>,
}

impl TurnBasedPolicy {
    /// Expand to a product policy: the controller of each state mixes over
    /// `{0, 1}`; everyone else pins action 0 (irrelevant in a turn-based
    /// game).
    pub fn to_product(
        &self,
        annotation: &TurnBasedAnnotation,
        num_players: usize,
        action_counts: &[usize],
    ) -> ProductPolicy {
        let num_states = self.values.len();
        let mut per_player: Vec<Vec<Vec<f64>>> = (0..num_players)
            .map(|i| {
                let mut row = vec![0.0; action_counts[i]];
                row[0] = 1.0;
                vec![row; num_states]
            })
            .collect();
        for (s, &p) in self.values.iter().enumerate() {
            let c = annotation.controller[s];
            per_player[c][s] = vec![1.0 - p, p];
        }
        ProductPolicy { per_player }
    }
}

/// Serialized mixture-of-profiles policy format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFile {
    pub horizon: usize,
    pub states: usize,
    pub actions: Vec<usize>,
    /// `cells[h][s]` = list of weighted per-player profiles.
    pub cells: Vec<Vec<Vec<PolicyFileEntry>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFileEntry {
    pub profile: Vec<usize>,
    pub weight: f64,
}

impl NonstationaryJointPolicy {
    /// File form, with duplicate profiles merged and sorted for diffability.
    pub fn to_file(&self) -> PolicyFile {
        let ix = self.indexer();
        PolicyFile {
            horizon: self.horizon,
            states: self.num_states,
            actions: self.action_counts.clone(),
            cells: self
                .cells
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cell| {
                            cell.merged()
                                .into_iter()
                                .map(|(a, w)| PolicyFileEntry { profile: ix.split(a), weight: w })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_file(file: &PolicyFile) -> crate::Result<Self> {
        let ix = JointIndexer::new(&file.actions);
        let cells = file
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| PolicyCell {
                        entries: cell
                            .iter()
                            .map(|e| (ix.flatten(&e.profile), e.weight))
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        let policy = Self {
            horizon: file.horizon,
            num_states: file.states,
            action_counts: file.actions.clone(),
            cells,
        };
        let violations = policy.validate();
        if violations.is_empty() {
            Ok(policy)
        } else {
            Err(crate::Error::InvalidPolicy(violations[0].to_string()))
        }
    }
}

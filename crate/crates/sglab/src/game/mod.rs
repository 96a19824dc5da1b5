//! Tabular stochastic games and exact dynamic-programming oracles.

mod cce;
mod discounted;
pub mod families;
mod finite;
mod gaps;
mod policy;
mod reduce;
mod value;
mod visitation;

pub use cce::backward_induction_cce;
pub use discounted::{DiscountedGame, TurnBasedAnnotation};
pub use finite::{sample_trajectory, FiniteHorizonGame, TrajStep, Trajectory};
pub use gaps::{
    equilibrium_gaps_discounted, equilibrium_gaps_finite, stage_deviation_gaps,
    stage_support_gaps, truncate_support, GapMode,
};
pub use policy::{
    NonstationaryJointPolicy, PolicyCell, PolicyFile, PolicyFileEntry, ProductPolicy,
    StationaryJointPolicy, StationaryPolicy, TurnBasedPolicy,
};
pub use reduce::{build_optimistic_game, discounted_to_finite, extend_policy, VisitedSet};
pub use value::{
    best_response_discounted, best_response_finite, exact_value_discounted, exact_value_finite,
    exact_value_unnormalized, fix_player_action, q_values_discounted, q_values_finite,
    DeterministicResponse, DiscountedValues, FiniteValues,
};
pub use visitation::{state_visitation_discounted, state_visitation_finite};

use serde::{Deserialize, Serialize};

/// A single invariant violation found by validation, with enough context to
/// locate the offending table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Row-major indexing over joint action profiles `(a_1, ..., a_m)`:
/// the last player's action varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointIndexer {
    counts: Vec<usize>,
}

impl JointIndexer {
    pub fn new(counts: &[usize]) -> Self {
        Self { counts: counts.to_vec() }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn num_profiles(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn flatten(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.counts.len());
        let mut idx = 0;
        for (a, n) in actions.iter().zip(&self.counts) {
            debug_assert!(a < n);
            idx = idx * n + a;
        }
        idx
    }

    pub fn split(&self, mut flat: usize) -> Vec<usize> {
        let mut actions = vec![0; self.counts.len()];
        for (slot, n) in actions.iter_mut().zip(&self.counts).rev() {
            *slot = flat % n;
            flat /= n;
        }
        actions
    }

    /// Action of one player inside a flat profile.
    pub fn player_action(&self, flat: usize, player: usize) -> usize {
        let trailing: usize = self.counts[player + 1..].iter().product();
        (flat / trailing) % self.counts[player]
    }

    /// Flat profile with `player`'s coordinate replaced by `action`.
    pub fn replace_action(&self, flat: usize, player: usize, action: usize) -> usize {
        let trailing: usize = self.counts[player + 1..].iter().product();
        let old = self.player_action(flat, player);
        let shift = (action as isize - old as isize) * trailing as isize;
        (flat as isize + shift) as usize
    }

    /// Indexer over the other players' profiles (player `i` removed).
    pub fn without_player(&self, player: usize) -> JointIndexer {
        let mut counts = self.counts.clone();
        counts.remove(player);
        JointIndexer { counts }
    }

    /// Flat index into `without_player(i)` space for a full flat profile.
    pub fn flat_excluding(&self, flat: usize, player: usize) -> usize {
        let actions = self.split(flat);
        let mut idx = 0;
        for (j, (a, n)) in actions.iter().zip(&self.counts).enumerate() {
            if j == player {
                continue;
            }
            idx = idx * n + a;
        }
        idx
    }

    /// Rebuild a full flat profile from `(player i action, flat index over the rest)`.
    pub fn combine(&self, player: usize, action: usize, flat_rest: usize) -> usize {
        let rest = self.without_player(player).split(flat_rest);
        let mut actions = Vec::with_capacity(self.counts.len());
        let mut it = rest.into_iter();
        for j in 0..self.counts.len() {
            if j == player {
                actions.push(action);
            } else {
                actions.push(it.next().unwrap());
            }
        }
        self.flatten(&actions)
    }
}

pub(crate) fn check_distribution(v: &[f64], tol: f64, loc: &str, out: &mut Vec<Violation>) {
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > tol {
        out.push(Violation {
            location: loc.to_string(),
            message: format!("probabilities sum to {sum}, expected 1"),
        });
    }
    if let Some(p) = v.iter().find(|p| **p < 0.0) {
        out.push(Violation {
            location: loc.to_string(),
            message: format!("negative probability {p}"),
        });
    }
}

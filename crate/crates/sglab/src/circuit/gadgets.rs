//! Standalone gate gadgets: minimal turn-based discounted games containing
//! one embedded gate with free input states. Used to brute-force the
//! gadget guarantees over policy grids, independently of the full compiler.

use crate::game::{DiscountedGame, JointIndexer, TurnBasedAnnotation, TurnBasedPolicy};
use crate::{Error, Result};

pub struct GadgetGame {
    pub game: DiscountedGame,
    pub annotation: TurnBasedAnnotation,
    /// states participating in the gate, in `(v1, v2, v3, w)` order where
    /// applicable
    pub states: Vec<usize>,
    pub sink: usize,
}

impl GadgetGame {
    /// Controller-side Q-values `(Q(s, 0), Q(s, 1))` for a policy.
    pub fn controller_q(&self, policy: &TurnBasedPolicy, s: usize) -> Result<(f64, f64)> {
        let product =
            policy.to_product(&self.annotation, self.game.num_players, &self.game.action_counts);
        let joint = product.to_joint(&self.game.indexer());
        let values = crate::game::exact_value_discounted(&self.game, &joint)?;
        let c = self.annotation.controller[s];
        Ok((
            self.annotation.controller_q(&self.game, &values.values[c], s, 0),
            self.annotation.controller_q(&self.game, &values.values[c], s, 1),
        ))
    }

    /// Supported-action gap at `s`; at most `eps` means `eps`-unimprovable.
    pub fn gap(&self, policy: &TurnBasedPolicy, s: usize) -> Result<f64> {
        let (q0, q1) = self.controller_q(policy, s)?;
        let p = policy.values[s];
        let mut worst = f64::INFINITY;
        if p < 1.0 {
            worst = worst.min(q0);
        }
        if p > 0.0 {
            worst = worst.min(q1);
        }
        Ok(q0.max(q1) - worst)
    }
}

struct RawBuilder {
    num_states: usize,
    sink: usize,
    controller: Vec<usize>,
    rows: Vec<[Vec<f64>; 2]>,
    rewards: Vec<[[f64; 2]; 2]>,
}

impl RawBuilder {
    fn new(num_states: usize, sink: usize, controller: Vec<usize>) -> Self {
        let mut rows = Vec::with_capacity(num_states);
        for _ in 0..num_states {
            let mut row = vec![0.0; num_states];
            row[sink] = 1.0;
            rows.push([row.clone(), row]);
        }
        Self { num_states, sink, controller, rows, rewards: vec![[[0.0; 2]; 2]; num_states] }
    }

    fn point(&self, target: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.num_states];
        row[target] = 1.0;
        row
    }

    fn finish(self, gamma: f64) -> Result<(DiscountedGame, TurnBasedAnnotation)> {
        let ix = JointIndexer::new(&[2, 2]);
        let transitions = (0..self.num_states)
            .map(|s| {
                (0..4)
                    .map(|a| self.rows[s][ix.player_action(a, self.controller[s])].clone())
                    .collect()
            })
            .collect();
        let rewards = (0..2)
            .map(|i| {
                (0..self.num_states)
                    .map(|s| {
                        (0..4)
                            .map(|a| self.rewards[s][i][ix.player_action(a, self.controller[s])])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let game = DiscountedGame {
            num_players: 2,
            num_states: self.num_states,
            action_counts: vec![2, 2],
            gamma,
            mu: vec![1.0 / self.num_states as f64; self.num_states],
            transitions,
            rewards,
        };
        if let Some(v) = game.validate().first() {
            return Err(Error::InvalidGame(format!("gadget game invalid: {v}")));
        }
        let annotation =
            TurnBasedAnnotation { controller: self.controller, sink: Some(self.sink) };
        Ok((game, annotation))
    }
}

const VP: usize = 0;
const WP: usize = 1;

fn check_magnitude(name: &str, value: f64, gamma: f64) -> Result<()> {
    if value.abs() > 1.0 - gamma + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "{name} = {value} exceeds 1 - gamma = {}",
            1.0 - gamma
        )));
    }
    Ok(())
}

/// Constant gadget: one node whose controller is paid `b` for action 1 and
/// `1 - b` for action 0, both leading to the sink.
pub fn embed_assign(value: bool, gamma: f64) -> Result<GadgetGame> {
    let (v, sink) = (0, 1);
    let mut b = RawBuilder::new(2, sink, vec![VP, VP]);
    let bit = if value { 1.0 } else { 0.0 };
    b.rewards[v][VP][1] = bit;
    b.rewards[v][VP][0] = 1.0 - bit;
    let (game, annotation) = b.finish(gamma)?;
    Ok(GadgetGame { game, annotation, states: vec![v], sink })
}

/// Scaled-sum gadget for the gate with coefficients
/// `(alpha / (2 beta), psi / (2 beta))`, free input states `v1, v2`.
pub fn embed_muladd(alpha: f64, psi: f64, beta: f64, gamma: f64) -> Result<GadgetGame> {
    for (name, v) in [("alpha", alpha), ("psi", psi), ("beta", beta)] {
        check_magnitude(name, v, gamma)?;
    }
    if beta == 0.0 {
        return Err(Error::InvalidParameter("beta must be nonzero".into()));
    }
    let (v1, v2, v3, w, sink) = (0, 1, 2, 3, 4);
    let mut b = RawBuilder::new(5, sink, vec![VP, VP, VP, WP, VP]);
    let scale = 1.0 - gamma;
    b.rewards[v1][WP][1] = alpha * (1f64).max(beta.abs() / alpha.abs()) / scale;
    b.rewards[v2][WP][1] = psi * (1f64).max(beta.abs() / psi.abs()) / scale;
    b.rewards[v3][WP][1] = beta / scale;
    b.rewards[w][VP][1] = beta / scale;
    b.rewards[w][VP][0] = -beta / scale;
    let mut jump = vec![0.0; 5];
    jump[v1] = (0.5f64).min(alpha.abs() / (2.0 * beta.abs()));
    jump[v2] = (0.5f64).min(psi.abs() / (2.0 * beta.abs()));
    jump[sink] = 1.0 - jump[v1] - jump[v2];
    b.rows[w] = [jump, b.point(v3)];
    b.rows[v3] = [b.point(w), b.point(sink)];
    let (game, annotation) = b.finish(gamma)?;
    Ok(GadgetGame { game, annotation, states: vec![v1, v2, v3, w], sink })
}

/// Scaled-sum gadget with both inputs wired to the same free state `v`:
/// the helper's jump probability doubles and the two scales must agree.
pub fn embed_muladd_dup(alpha: f64, beta: f64, gamma: f64) -> Result<GadgetGame> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        check_magnitude(name, v, gamma)?;
    }
    if beta == 0.0 {
        return Err(Error::InvalidParameter("beta must be nonzero".into()));
    }
    let (v, v3, w, sink) = (0, 1, 2, 3);
    let mut b = RawBuilder::new(4, sink, vec![VP, VP, WP, VP]);
    let scale = 1.0 - gamma;
    b.rewards[v][WP][1] = alpha * (1f64).max(beta.abs() / alpha.abs()) / scale;
    b.rewards[v3][WP][1] = beta / scale;
    b.rewards[w][VP][1] = beta / scale;
    b.rewards[w][VP][0] = -beta / scale;
    let mut jump = vec![0.0; 4];
    jump[v] = 2.0 * (0.5f64).min(alpha.abs() / (2.0 * beta.abs()));
    jump[sink] = 1.0 - jump[v];
    b.rows[w] = [jump, b.point(v3)];
    b.rows[v3] = [b.point(w), b.point(sink)];
    let (game, annotation) = b.finish(gamma)?;
    Ok(GadgetGame { game, annotation, states: vec![v, v3, w], sink })
}

/// Comparison gadget with stake `beta` and free input states `v1, v2`.
pub fn embed_less(beta: f64, gamma: f64) -> Result<GadgetGame> {
    check_magnitude("beta", beta, gamma)?;
    let (v1, v2, v3, w, sink) = (0, 1, 2, 3, 4);
    let mut b = RawBuilder::new(5, sink, vec![VP, VP, VP, WP, VP]);
    let scale = 1.0 - gamma;
    b.rewards[v1][WP][1] = beta / scale;
    b.rewards[v2][WP][1] = beta / scale;
    b.rewards[w][VP][1] = beta / scale;
    b.rewards[w][VP][0] = -beta / scale;
    b.rows[w] = [b.point(v1), b.point(v2)];
    b.rows[v3] = [b.point(sink), b.point(w)];
    let (game, annotation) = b.finish(gamma)?;
    Ok(GadgetGame { game, annotation, states: vec![v1, v2, v3, w], sink })
}

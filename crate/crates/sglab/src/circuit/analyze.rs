use super::compile::CompiledGame;
use super::model::{Assignment, Gate, GeneralizedCircuit};
use crate::game::{exact_value_discounted, TurnBasedPolicy};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub gate_satisfied: Vec<bool>,
    pub satisfied_fraction: f64,
}

impl CheckReport {
    pub fn all_satisfied(&self) -> bool {
        self.gate_satisfied.iter().all(|b| *b)
    }
}

/// Checks which gates an assignment satisfies at tolerance `eps`.
///
/// Constant gates demand exact equality; scaled-sum gates allow `eps`
/// slack around the clamped combination; comparison gates constrain the
/// output only when the inputs are separated by at least `eps`.
pub fn check_assignment(
    circuit: &GeneralizedCircuit,
    assignment: &Assignment,
    eps: f64,
) -> Result<CheckReport> {
    if !circuit.is_base() {
        return Err(Error::InvalidCircuit(
            "assignment checking expects a normalized circuit".into(),
        ));
    }
    if assignment.values.len() != circuit.num_nodes() {
        return Err(Error::InvalidCircuit(format!(
            "assignment covers {} nodes, circuit has {}",
            assignment.values.len(),
            circuit.num_nodes()
        )));
    }
    let pi = &assignment.values;
    let gate_satisfied: Vec<bool> = circuit
        .gates
        .iter()
        .map(|gate| match *gate {
            Gate::Assign { value, out } => pi[out] == if value { 1.0 } else { 0.0 },
            Gate::MulAdd { xi, zeta, in1, in2, out } => {
                let target = (xi * pi[in1] + zeta * pi[in2]).clamp(0.0, 1.0);
                (pi[out] - target).abs() <= eps
            }
            Gate::Less { in1, in2, out } => {
                if pi[in1] <= pi[in2] - eps {
                    (pi[out] - 1.0).abs() <= eps
                } else if pi[in1] >= pi[in2] + eps {
                    pi[out].abs() <= eps
                } else {
                    true
                }
            }
            _ => unreachable!("base circuit checked above"),
        })
        .collect();
    let satisfied = gate_satisfied.iter().filter(|b| **b).count();
    Ok(CheckReport {
        satisfied_fraction: satisfied as f64 / gate_satisfied.len().max(1) as f64,
        gate_satisfied,
    })
}

/// Deviation gap of the controller at state `s` restricted to its
/// supported actions:
/// `max_a Q(s, a) - min_{a in supp} Q(s, a)` with normalized Q-values.
/// A state is `eps`-unimprovable when the gap is at most `eps`.
pub fn unimprovable_gap(
    compiled: &CompiledGame,
    policy: &TurnBasedPolicy,
    s: usize,
) -> Result<f64> {
    let game = &compiled.game;
    let ann = &compiled.annotation;
    let product = policy.to_product(ann, game.num_players, &game.action_counts);
    let joint = product.to_joint(&game.indexer());
    let values = exact_value_discounted(game, &joint)?;
    let controller = ann.controller[s];
    let q0 = ann.controller_q(game, &values.values[controller], s, 0);
    let q1 = ann.controller_q(game, &values.values[controller], s, 1);
    let best = q0.max(q1);
    let p = policy.values[s];
    let mut worst_supported = f64::INFINITY;
    if p < 1.0 {
        worst_supported = worst_supported.min(q0);
    }
    if p > 0.0 {
        worst_supported = worst_supported.min(q1);
    }
    Ok(best - worst_supported)
}

/// Restriction of a stationary policy on the compiled game to the circuit's
/// node states.
pub fn extract_assignment(compiled: &CompiledGame, policy: &TurnBasedPolicy) -> Assignment {
    let n_nodes = compiled.meta.node_states.len();
    let mut values = vec![0.0; n_nodes];
    for &state in compiled.meta.node_states.values() {
        values[state] = policy.values[state].clamp(0.0, 1.0);
    }
    Assignment { values }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::coloring::check_coloring;
use super::model::{Coloring, Gate, GeneralizedCircuit};
use crate::game::{DiscountedGame, TurnBasedAnnotation};
use crate::{Error, Result};

/// Compilation constants: the game's discount and the `(eps, eps')`
/// pair the gadget guarantees are proved for. The gadget inequality
/// `gamma * min|phi| * eps - 2 gamma^2 > eps'` is validated up front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompileParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub epsilon_prime: f64,
}

impl CompileParams {
    /// The default schedule: `gamma = eps^2`, `eps' = eps^4`.
    pub fn for_epsilon(epsilon: f64) -> Self {
        Self { epsilon, gamma: epsilon * epsilon, epsilon_prime: epsilon.powi(4) }
    }
}

/// Per-gate embedding constants recorded in the compiled game's metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateConstants {
    Assign { value: f64 },
    MulAdd { alpha: f64, psi: f64, beta: f64 },
    Less { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileMeta {
    /// circuit node name -> game state
    pub node_states: BTreeMap<String, usize>,
    /// helper state per gate, aligned with the gate list
    pub helper_states: Vec<usize>,
    pub sink: usize,
    pub controller: Vec<usize>,
    pub constants: Vec<GateConstants>,
    pub params: CompileParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledGame {
    pub game: DiscountedGame,
    pub annotation: TurnBasedAnnotation,
    pub meta: CompileMeta,
}

/// Serialized compiled game: the plain game format plus a `meta` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompiledGameFile {
    #[serde(flatten)]
    pub game: DiscountedGame,
    pub meta: CompileMeta,
}

impl CompiledGame {
    pub fn to_file(&self) -> CompiledGameFile {
        CompiledGameFile { game: self.game.clone(), meta: self.meta.clone() }
    }

    pub fn from_file(file: CompiledGameFile) -> Self {
        let annotation = TurnBasedAnnotation {
            controller: file.meta.controller.clone(),
            sink: Some(file.meta.sink),
        };
        CompiledGame { game: file.game, annotation, meta: file.meta }
    }

    pub fn node_state(&self, name: &str) -> Option<usize> {
        self.meta.node_states.get(name).copied()
    }
}

const VP: usize = 0;
const WP: usize = 1;

/// Turn-based game under construction. Transitions and per-player rewards
/// default to "everything falls into the sink and pays zero"; each cell may
/// be written at most once beyond that, so conflicting gadget requirements
/// surface as errors instead of silent overwrites.
struct TurnBasedBuilder {
    num_states: usize,
    sink: usize,
    /// `rows[s][controller action]`, `None` = default sink row
    rows: Vec<[Option<Vec<f64>>; 2]>,
    /// `rewards[s][player][controller action]`
    rewards: Vec<[[Option<f64>; 2]; 2]>,
}

impl TurnBasedBuilder {
    fn new(num_states: usize, sink: usize) -> Self {
        Self {
            num_states,
            sink,
            rows: (0..num_states).map(|_| [None, None]).collect(),
            rewards: vec![[[None; 2]; 2]; num_states],
        }
    }

    fn point_row(&self, target: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.num_states];
        row[target] = 1.0;
        row
    }

    fn write_transitions(&mut self, s: usize, rows: [Vec<f64>; 2]) -> Result<()> {
        if self.rows[s][0].is_some() || self.rows[s][1].is_some() {
            return Err(Error::InvalidCircuit(format!(
                "transitions at state {s} written twice"
            )));
        }
        let [r0, r1] = rows;
        self.rows[s][0] = Some(r0);
        self.rows[s][1] = Some(r1);
        Ok(())
    }

    fn write_reward(&mut self, s: usize, player: usize, action: usize, value: f64) -> Result<()> {
        if self.rewards[s][player][action].is_some() {
            return Err(Error::InvalidCircuit(format!(
                "reward at (state {s}, player {player}, action {action}) written twice"
            )));
        }
        self.rewards[s][player][action] = Some(value);
        Ok(())
    }

    fn finish(self, gamma: f64, mu: Vec<f64>, controller: &[usize]) -> Result<DiscountedGame> {
        let ix = crate::game::JointIndexer::new(&[2, 2]);
        let na = 4;
        let mut transitions = Vec::with_capacity(self.num_states);
        let mut rewards: Vec<Vec<Vec<f64>>> =
            (0..2).map(|_| Vec::with_capacity(self.num_states)).collect();
        for s in 0..self.num_states {
            let c = controller[s];
            let mut per_action = Vec::with_capacity(na);
            for a in 0..na {
                let ca = ix.player_action(a, c);
                per_action.push(match &self.rows[s][ca] {
                    Some(row) => row.clone(),
                    None => self.point_row(self.sink),
                });
            }
            transitions.push(per_action);
            for (i, table) in rewards.iter_mut().enumerate() {
                let mut row = vec![0.0; na];
                for (a, slot) in row.iter_mut().enumerate() {
                    let ca = ix.player_action(a, c);
                    *slot = self.rewards[s][i][ca].unwrap_or(0.0);
                }
                table.push(row);
            }
        }
        for table in &rewards {
            for row in table.iter().flatten() {
                if row.abs() > 1.0 + 1e-12 {
                    return Err(Error::InvalidCircuit(format!(
                        "compiled reward {row} exceeds magnitude 1; lower gamma or the coloring range"
                    )));
                }
            }
        }
        let game = DiscountedGame {
            num_players: 2,
            num_states: self.num_states,
            action_counts: vec![2, 2],
            gamma,
            mu,
            transitions,
            rewards,
        };
        let violations = game.validate();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidCircuit(format!("compiled game invalid: {v}")));
        }
        Ok(game)
    }
}

/// Embeds a normalized circuit with a valid coloring into a 2-player
/// turn-based discounted game.
///
/// States are the circuit nodes (player 0's), one helper per gate (player
/// 1's), and an absorbing zero-reward sink. Player 1 earns
/// `phi(v) / (1 - gamma)` whenever player 0 plays action 1 at a node `v`;
/// gate-specific transitions and player-0 rewards at helpers make each
/// gate's input-output relation the only stable configuration.
pub fn compile(
    circuit: &GeneralizedCircuit,
    coloring: &Coloring,
    params: CompileParams,
) -> Result<CompiledGame> {
    if !circuit.is_base() {
        return Err(Error::InvalidCircuit("compile expects a normalized circuit".into()));
    }
    circuit.validate()?;
    let report = check_coloring(circuit, coloring)?;
    if !report.valid {
        return Err(Error::InvalidColoring(format!(
            "coloring is not valid: {}",
            report.violations.join("; ")
        )));
    }
    let output_map = circuit.output_map()?;
    if output_map.iter().any(Option::is_none) {
        return Err(Error::InvalidCircuit(
            "every node must be the output of a gate; normalize the circuit first".into(),
        ));
    }
    if !(0.0 < params.gamma && params.gamma <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "discount must lie in (0, 1/2], got {}",
            params.gamma
        )));
    }
    let beta0 = coloring.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if params.gamma * beta0 * params.epsilon - 2.0 * params.gamma * params.gamma
        <= params.epsilon_prime
    {
        return Err(Error::InvalidParameter(format!(
            "gadget inequality violated: gamma*|beta0|*eps - 2 gamma^2 = {:.3e} <= eps' = {:.3e}",
            params.gamma * beta0 * params.epsilon - 2.0 * params.gamma * params.gamma,
            params.epsilon_prime
        )));
    }
    let max_phi = coloring.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_phi > 1.0 - params.gamma + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "coloring magnitude {max_phi} exceeds 1 - gamma = {}",
            1.0 - params.gamma
        )));
    }

    let n_nodes = circuit.num_nodes();
    let n_gates = circuit.gates.len();
    let num_states = n_nodes + n_gates + 1;
    let sink = num_states - 1;
    let helper = |g: usize| n_nodes + g;
    let mut controller = vec![VP; num_states];
    for g in 0..n_gates {
        controller[helper(g)] = WP;
    }
    controller[sink] = VP;

    let mut builder = TurnBasedBuilder::new(num_states, sink);
    let one_minus_gamma = 1.0 - params.gamma;
    // player 1's stake in every node state
    for v in 0..n_nodes {
        builder.write_reward(v, WP, 1, coloring.values[v] / one_minus_gamma)?;
    }

    let mut constants = Vec::with_capacity(n_gates);
    for (g, gate) in circuit.gates.iter().enumerate() {
        let w = helper(g);
        match *gate {
            Gate::Assign { value, out } => {
                let b = if value { 1.0 } else { 0.0 };
                builder.write_reward(out, VP, 1, b)?;
                builder.write_reward(out, VP, 0, 1.0 - b)?;
                builder.write_transitions(
                    out,
                    [builder.point_row(sink), builder.point_row(sink)],
                )?;
                constants.push(GateConstants::Assign { value: b });
            }
            Gate::MulAdd { xi, zeta, in1, in2, out } => {
                let beta = coloring.values[out];
                let alpha = if xi.abs() >= 0.5 {
                    coloring.values[in1]
                } else {
                    coloring.values[in1] * 2.0 * xi.abs()
                };
                let psi = if zeta.abs() >= 0.5 {
                    coloring.values[in2]
                } else {
                    coloring.values[in2] * 2.0 * zeta.abs()
                };
                // the phi rewards already realize the gadget's input stakes
                debug_assert!(
                    alpha == 0.0
                        || (alpha * (1f64).max(beta.abs() / alpha.abs())
                            - coloring.values[in1])
                            .abs()
                            < 1e-9
                );
                debug_assert!(
                    psi == 0.0
                        || (psi * (1f64).max(beta.abs() / psi.abs()) - coloring.values[in2])
                            .abs()
                            < 1e-9
                );
                let mut jump = vec![0.0; num_states];
                if in1 == in2 {
                    if (alpha - psi).abs() > 1e-12 {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: repeated input needs matching scales, got {alpha} vs {psi}"
                        )));
                    }
                    jump[in1] = 2.0 * (0.5f64).min(alpha.abs() / (2.0 * beta.abs()));
                } else {
                    jump[in1] = (0.5f64).min(alpha.abs() / (2.0 * beta.abs()));
                    jump[in2] = (0.5f64).min(psi.abs() / (2.0 * beta.abs()));
                }
                let assigned: f64 = jump.iter().sum();
                jump[sink] = 1.0 - assigned;
                builder.write_transitions(w, [jump, builder.point_row(out)])?;
                builder.write_transitions(
                    out,
                    [builder.point_row(w), builder.point_row(sink)],
                )?;
                builder.write_reward(w, VP, 1, beta / one_minus_gamma)?;
                builder.write_reward(w, VP, 0, -beta / one_minus_gamma)?;
                constants.push(GateConstants::MulAdd { alpha, psi, beta });
            }
            Gate::Less { in1, in2, out } => {
                let beta = coloring.values[in1];
                builder.write_transitions(
                    w,
                    [builder.point_row(in1), builder.point_row(in2)],
                )?;
                builder.write_transitions(
                    out,
                    [builder.point_row(sink), builder.point_row(w)],
                )?;
                builder.write_reward(w, VP, 1, beta / one_minus_gamma)?;
                builder.write_reward(w, VP, 0, -beta / one_minus_gamma)?;
                constants.push(GateConstants::Less { beta });
            }
            _ => unreachable!("base circuit checked above"),
        }
    }

    let mu = vec![1.0 / num_states as f64; num_states];
    let game = builder.finish(params.gamma, mu, &controller)?;
    let annotation = TurnBasedAnnotation { controller: controller.clone(), sink: Some(sink) };
    debug_assert!(annotation.validate(&game).is_empty());
    let meta = CompileMeta {
        node_states: circuit
            .node_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect(),
        helper_states: (0..n_gates).map(helper).collect(),
        sink,
        controller,
        constants,
        params,
    };
    Ok(CompiledGame { game, annotation, meta })
}

/// Re-expresses a `gamma <= 1/2`-discounted game with a designated
/// absorbing zero-reward sink as a `1/2`-discounted game with identical
/// states, actions, and rewards: every transition keeps `2 gamma` of its
/// mass and the remaining `1 - 2 gamma` falls into the sink. For any
/// stationary policy, the expected discounted reward sums (before the
/// `1 - gamma` normalization) coincide exactly.
pub fn rescale_to_half_discount(game: &DiscountedGame, sink: usize) -> Result<DiscountedGame> {
    if game.gamma > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "rescaling needs gamma <= 1/2, got {}",
            game.gamma
        )));
    }
    let na = game.num_joint_actions();
    for a in 0..na {
        if game.transitions[sink][a][sink] != 1.0
            || game.rewards.iter().any(|r| r[sink][a] != 0.0)
        {
            return Err(Error::InvalidGame(
                "designated sink must be absorbing with zero rewards".into(),
            ));
        }
    }
    let scale = game.gamma / 0.5;
    let spill = 1.0 - 2.0 * game.gamma;
    let transitions = (0..game.num_states)
        .map(|s| {
            (0..na)
                .map(|a| {
                    let mut row: Vec<f64> =
                        game.transitions[s][a].iter().map(|p| scale * p).collect();
                    row[sink] += spill;
                    row
                })
                .collect()
        })
        .collect();
    let mut out = game.clone();
    out.gamma = 0.5;
    out.transitions = transitions;
    let violations = out.validate();
    if let Some(v) = violations.first() {
        return Err(Error::InvalidGame(format!("rescaled game invalid: {v}")));
    }
    Ok(out)
}

impl CompiledGame {
    pub fn rescale_to_half_discount(&self) -> Result<CompiledGame> {
        let game = rescale_to_half_discount(&self.game, self.meta.sink)?;
        let mut meta = self.meta.clone();
        meta.params.gamma = 0.5;
        Ok(CompiledGame { game, annotation: self.annotation.clone(), meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::make_valid_coloring;
    use crate::game::families::random_stationary_policy;
    use crate::game::{exact_value_unnormalized, JointIndexer};
    use approx::assert_abs_diff_eq;

    fn single_assign() -> (GeneralizedCircuit, Coloring) {
        let mut c = GeneralizedCircuit::default();
        let v = c.add_node("v");
        c.gates.push(Gate::Assign { value: true, out: v });
        (c, Coloring { values: vec![0.25] })
    }

    #[test]
    fn assign_gadget_rewards_and_transitions() {
        let (c, phi) = single_assign();
        let params = CompileParams { epsilon: 0.45, gamma: 0.05, epsilon_prime: 1e-4 };
        let cg = compile(&c, &phi, params).unwrap();
        let ix: JointIndexer = cg.game.indexer();
        let v = cg.node_state("v").unwrap();
        // controller of v is player 0; reward follows its action alone
        let a1 = ix.flatten(&[1, 0]);
        let a0 = ix.flatten(&[0, 1]);
        assert_abs_diff_eq!(cg.game.rewards[0][v][a1], 1.0);
        assert_abs_diff_eq!(cg.game.rewards[0][v][a0], 0.0);
        // player 1 collects the color stake when action 1 is played at v
        assert_abs_diff_eq!(cg.game.rewards[1][v][a1], 0.25 / 0.95);
        assert_abs_diff_eq!(cg.game.transitions[v][a1][cg.meta.sink], 1.0);
        assert_abs_diff_eq!(cg.game.transitions[v][a0][cg.meta.sink], 1.0);
        assert!(cg.annotation.validate(&cg.game).is_empty());
    }

    #[test]
    fn muladd_gadget_fields_match_the_embedding() {
        let mut c = GeneralizedCircuit::default();
        let v1 = c.add_node("v1");
        let v2 = c.add_node("v2");
        let v3 = c.add_node("v3");
        c.gates.push(Gate::Assign { value: true, out: v1 });
        c.gates.push(Gate::Assign { value: false, out: v2 });
        c.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1: v1, in2: v2, out: v3 });
        c.gates.push(Gate::Assign { value: true, out: v3 });
        // ^ invalid: v3 has two gates
        assert!(c.output_map().is_err());
        c.gates.pop();

        let phi = Coloring { values: vec![0.25, 0.25, 0.25] };
        let params = CompileParams { epsilon: 0.45, gamma: 0.05, epsilon_prime: 1e-4 };
        let cg = compile(&c, &phi, params).unwrap();
        match &cg.meta.constants[2] {
            GateConstants::MulAdd { alpha, psi, beta } => {
                assert_abs_diff_eq!(*alpha, 0.25);
                assert_abs_diff_eq!(*psi, 0.25);
                assert_abs_diff_eq!(*beta, 0.25);
            }
            other => panic!("wrong constants {other:?}"),
        }
        let w = cg.meta.helper_states[2];
        let ix = cg.game.indexer();
        let w0 = ix.flatten(&[0, 0]); // helper belongs to player 1
        assert_abs_diff_eq!(cg.game.transitions[w][w0][0], 0.5); // to v1
        assert_abs_diff_eq!(cg.game.transitions[w][w0][1], 0.5); // to v2
        let w1 = ix.flatten(&[0, 1]);
        assert_abs_diff_eq!(cg.game.transitions[w][w1][2], 1.0); // to v3
        // player 0's stake at the helper
        assert_abs_diff_eq!(cg.game.rewards[0][w][ix.flatten(&[0, 1])], 0.25 / 0.95);
        assert_abs_diff_eq!(cg.game.rewards[0][w][ix.flatten(&[1, 0])], -0.25 / 0.95);
        // v3's own transitions: action 0 visits the helper, action 1 quits
        let v3a0 = ix.flatten(&[0, 0]);
        let v3a1 = ix.flatten(&[1, 0]);
        assert_abs_diff_eq!(cg.game.transitions[2][v3a0][w], 1.0);
        assert_abs_diff_eq!(cg.game.transitions[2][v3a1][cg.meta.sink], 1.0);
    }

    #[test]
    fn less_gadget_transitions() {
        let mut c = GeneralizedCircuit::default();
        let v1 = c.add_node("v1");
        let v2 = c.add_node("v2");
        let v3 = c.add_node("v3");
        c.gates.push(Gate::Assign { value: true, out: v1 });
        c.gates.push(Gate::Assign { value: false, out: v2 });
        c.gates.push(Gate::Less { in1: v1, in2: v2, out: v3 });
        let phi = Coloring { values: vec![0.25, 0.25, -0.25] };
        let params = CompileParams { epsilon: 0.45, gamma: 0.05, epsilon_prime: 1e-4 };
        let cg = compile(&c, &phi, params).unwrap();
        let ix = cg.game.indexer();
        let w = cg.meta.helper_states[2];
        assert_abs_diff_eq!(cg.game.transitions[w][ix.flatten(&[0, 0])][v1], 1.0);
        assert_abs_diff_eq!(cg.game.transitions[w][ix.flatten(&[0, 1])][v2], 1.0);
        assert_abs_diff_eq!(cg.game.transitions[v3][ix.flatten(&[1, 0])][w], 1.0);
        assert_abs_diff_eq!(cg.game.transitions[v3][ix.flatten(&[0, 0])][cg.meta.sink], 1.0);
    }

    #[test]
    fn parameter_inequality_is_enforced() {
        let (c, phi) = single_assign();
        // gamma too large for this (eps, eps') pair
        let params = CompileParams { epsilon: 0.1, gamma: 0.4, epsilon_prime: 1e-4 };
        assert!(compile(&c, &phi, params).is_err());
    }

    #[test]
    fn rescaling_splits_mass_toward_the_sink() {
        // 3 states: 0 -> 1 deterministically, 2 is the sink
        let game = DiscountedGame {
            num_players: 1,
            num_states: 3,
            action_counts: vec![1],
            gamma: 0.25,
            mu: vec![1.0, 0.0, 0.0],
            transitions: vec![
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
                vec![vec![0.0, 0.0, 1.0]],
            ],
            rewards: vec![vec![vec![0.5], vec![-0.5], vec![0.0]]],
        };
        let half = rescale_to_half_discount(&game, 2).unwrap();
        assert_abs_diff_eq!(half.gamma, 0.5);
        // gamma / (1/2) = 1/2 of the mass survives, the rest spills
        assert_abs_diff_eq!(half.transitions[0][0][1], 0.5);
        assert_abs_diff_eq!(half.transitions[0][0][2], 0.5);
        // sink row unchanged
        assert_abs_diff_eq!(half.transitions[2][0][2], 1.0);
        assert!(rescale_to_half_discount(&half, 2).is_ok());
        let mut too_big = game.clone();
        too_big.gamma = 0.6;
        assert!(rescale_to_half_discount(&too_big, 2).is_err());
    }

    #[test]
    fn rescaling_preserves_unnormalized_values() {
        // a compiled game with a few gate types
        let mut c = GeneralizedCircuit::default();
        let a = c.add_node("a");
        let b = c.add_node("b");
        let d = c.add_node("d");
        let e = c.add_node("e");
        c.gates.push(Gate::Assign { value: true, out: a });
        c.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1: a, in2: a, out: b });
        c.gates.push(Gate::Less { in1: a, in2: b, out: d });
        c.gates.push(Gate::MulAdd { xi: 1.0, zeta: -1.0, in1: a, in2: b, out: e });
        let (rc, phi, _) = make_valid_coloring(&c, 0.09).unwrap();
        let params = CompileParams { epsilon: 0.3, gamma: 0.03, epsilon_prime: 4e-4 };
        let cg = compile(&rc, &phi, params).unwrap();
        let half = cg.rescale_to_half_discount().unwrap();
        for seed in 0..10 {
            let policy = random_stationary_policy(&cg.game, 1000 + seed);
            let u1 = exact_value_unnormalized(&cg.game, &policy).unwrap();
            let u2 = exact_value_unnormalized(&half.game, &policy).unwrap();
            for i in 0..2 {
                for s in 0..cg.game.num_states {
                    assert!(
                        (u1.values[i][s] - u2.values[i][s]).abs() <= 1e-8,
                        "seed {seed} player {i} state {s}: {} vs {}",
                        u1.values[i][s],
                        u2.values[i][s]
                    );
                }
            }
        }
    }

    #[test]
    fn compiled_file_roundtrip() {
        let (c, phi) = single_assign();
        let params = CompileParams { epsilon: 0.45, gamma: 0.05, epsilon_prime: 1e-4 };
        let cg = compile(&c, &phi, params).unwrap();
        let json = serde_json::to_string(&cg.to_file()).unwrap();
        let back = CompiledGame::from_file(serde_json::from_str(&json).unwrap());
        assert_eq!(back, cg);
    }
}

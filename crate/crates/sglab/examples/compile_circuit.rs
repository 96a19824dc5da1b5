//! Circuit-to-game pipeline: desugar a small generalized circuit, build a
//! valid coloring with identity chains, embed it into a 2-player
//! turn-based discounted game, rescale to discount 1/2, and decode an
//! equilibrium of a constants-only instance back into an assignment.
//!
//! ```bash
//! cargo run --release --example compile_circuit
//! ```

use sglab::circuit::{
    check_assignment, check_coloring, compile, extract_assignment, make_valid_coloring,
    normalize_circuit, unimprovable_gap, CompileParams, Gate, GeneralizedCircuit,
};
use sglab::game::{exact_value_unnormalized, TurnBasedPolicy};

fn main() {
    // not(x) fed into a comparison; extended gates desugar away
    let mut circuit = GeneralizedCircuit::default();
    let x = circuit.add_node("x");
    let y = circuit.add_node("y");
    let z = circuit.add_node("z");
    circuit.gates.push(Gate::Not { input: x, out: y });
    circuit.gates.push(Gate::Less { in1: y, in2: x, out: z });

    let normalized = normalize_circuit(&circuit).unwrap();
    println!(
        "normalized: {} nodes, {} base gates",
        normalized.num_nodes(),
        normalized.gates.len()
    );

    let eps = 1.0 / 16.0;
    let (rebuilt, coloring, stats) = make_valid_coloring(&normalized, eps).unwrap();
    println!(
        "colored: {} nodes after adding {}-node chains per scaled-sum input \
         (granularity {})",
        rebuilt.num_nodes(),
        stats.chain_nodes_per_input,
        stats.epsilon_prime
    );
    assert!(check_coloring(&rebuilt, &coloring).unwrap().valid);

    let compiled = compile(&rebuilt, &coloring, CompileParams::for_epsilon(eps)).unwrap();
    println!(
        "compiled: {} states (nodes + one helper per gate + sink), discount {}",
        compiled.game.num_states, compiled.game.gamma
    );

    let half = compiled.rescale_to_half_discount().unwrap();
    let policy = TurnBasedPolicy { values: vec![0.5; compiled.game.num_states] };
    let product =
        policy.to_product(&compiled.annotation, 2, &compiled.game.action_counts);
    let joint = product.to_joint(&compiled.game.indexer());
    let u = exact_value_unnormalized(&compiled.game, &joint).unwrap();
    let u_half = exact_value_unnormalized(&half.game, &joint).unwrap();
    let drift = (0..compiled.game.num_states)
        .map(|s| (u.values[0][s] - u_half.values[0][s]).abs())
        .fold(0.0f64, f64::max);
    println!("rescaled to discount 1/2; value drift {drift:.2e}");

    // a constants-only instance decodes by brute force
    let mut constants = GeneralizedCircuit::default();
    let a = constants.add_node("a");
    let b = constants.add_node("b");
    constants.gates.push(Gate::Assign { value: true, out: a });
    constants.gates.push(Gate::Assign { value: false, out: b });
    let (rc, phi, _) = make_valid_coloring(&constants, eps).unwrap();
    let cg = compile(&rc, &phi, CompileParams::for_epsilon(eps)).unwrap();
    let n = cg.game.num_states;
    for code in 0..(1usize << n) {
        let candidate = TurnBasedPolicy {
            values: (0..n).map(|s| ((code >> s) & 1) as f64).collect(),
        };
        let stable =
            (0..n).all(|s| unimprovable_gap(&cg, &candidate, s).unwrap() <= 1e-12);
        if stable {
            let assignment = extract_assignment(&cg, &candidate);
            let ok = check_assignment(&rc, &assignment, eps).unwrap().all_satisfied();
            println!(
                "stable deterministic policy {code:0n$b} decodes to {:?} (satisfying: {ok})",
                assignment.values
            );
            break;
        }
    }
}

use super::model::{Gate, GeneralizedCircuit};
use crate::Result;

/// Lowers a circuit to the base gate set and pins every dangling node.
///
/// Extended gates desugar into `Assign`/`MulAdd`/`Less` combinations with
/// fresh helper nodes (named `__g<idx>_*` after the originating gate's
/// index). Any node that is the output of no gate afterwards gets pinned to
/// the constant 1 by a fresh `Assign` gate, so every node of the result is
/// the output of exactly one gate.
pub fn normalize_circuit(circuit: &GeneralizedCircuit) -> Result<GeneralizedCircuit> {
    circuit.validate()?;
    let mut out = GeneralizedCircuit {
        node_names: circuit.node_names.clone(),
        gates: Vec::with_capacity(circuit.gates.len()),
    };
    for (g, gate) in circuit.gates.iter().enumerate() {
        match *gate {
            Gate::Assign { .. } | Gate::MulAdd { .. } | Gate::Less { .. } => {
                out.gates.push(gate.clone())
            }
            Gate::Mul { zeta, input, out: o } => {
                out.gates.push(Gate::MulAdd {
                    xi: zeta / 2.0,
                    zeta: zeta / 2.0,
                    in1: input,
                    in2: input,
                    out: o,
                });
            }
            Gate::Eq { input, out: o } => {
                out.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1: input, in2: input, out: o });
            }
            Gate::Plus { in1, in2, out: o } => {
                out.gates.push(Gate::MulAdd { xi: 1.0, zeta: 1.0, in1, in2, out: o });
            }
            Gate::Minus { in1, in2, out: o } => {
                out.gates.push(Gate::MulAdd { xi: 1.0, zeta: -1.0, in1, in2, out: o });
            }
            Gate::AssignReal { value, out: o } => {
                let u = out.add_node(format!("__g{g}_u"));
                out.gates.push(Gate::Assign { value: true, out: u });
                out.gates.push(Gate::MulAdd {
                    xi: value / 2.0,
                    zeta: value / 2.0,
                    in1: u,
                    in2: u,
                    out: o,
                });
            }
            Gate::Or { in1, in2, out: o } | Gate::And { in1, in2, out: o } => {
                // average the inputs, compare against a constant threshold:
                // 1/4 for or, 3/8 for and
                let scale = if matches!(gate, Gate::Or { .. }) { 0.125 } else { 0.375 };
                let u1 = out.add_node(format!("__g{g}_u1"));
                let u2 = out.add_node(format!("__g{g}_u2"));
                let u3 = out.add_node(format!("__g{g}_u3"));
                out.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1, in2, out: u1 });
                out.gates.push(Gate::Assign { value: true, out: u2 });
                out.gates.push(Gate::MulAdd { xi: scale, zeta: scale, in1: u2, in2: u2, out: u3 });
                out.gates.push(Gate::Less { in1: u3, in2: u1, out: o });
            }
            Gate::Not { input, out: o } => {
                let u1 = out.add_node(format!("__g{g}_u1"));
                out.gates.push(Gate::Assign { value: true, out: u1 });
                out.gates.push(Gate::MulAdd { xi: 1.0, zeta: -1.0, in1: u1, in2: input, out: o });
            }
        }
    }
    // pin dangling nodes
    let map = out.output_map()?;
    for v in 0..circuit.num_nodes() {
        if map[v].is_none() {
            out.gates.push(Gate::Assign { value: true, out: v });
        }
    }
    debug_assert!(out.output_map()?.iter().all(Option::is_some));
    out.validate()?;
    Ok(out)
}

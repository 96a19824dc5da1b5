use super::coloring_scale;
use super::model::{Coloring, Gate, GeneralizedCircuit, NodeId};
use crate::{Error, Result};

const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ColoringReport {
    pub valid: bool,
    /// per-gate verdicts, aligned with the gate list
    pub gate_valid: Vec<bool>,
    pub violations: Vec<String>,
}

/// Validity of a coloring: comparison gates need equal input colors, and a
/// scaled-sum gate's input colors must relate to its output color by
/// [`coloring_scale`] of the respective parameter. Constant gates are
/// always valid.
pub fn check_coloring(circuit: &GeneralizedCircuit, coloring: &Coloring) -> Result<ColoringReport> {
    if coloring.values.len() != circuit.num_nodes() {
        return Err(Error::InvalidColoring(format!(
            "coloring covers {} nodes, circuit has {}",
            coloring.values.len(),
            circuit.num_nodes()
        )));
    }
    let phi = &coloring.values;
    let mut gate_valid = Vec::with_capacity(circuit.gates.len());
    let mut violations = Vec::new();
    for (g, gate) in circuit.gates.iter().enumerate() {
        let ok = match *gate {
            Gate::Assign { .. } => true,
            Gate::Less { in1, in2, .. } => {
                let ok = (phi[in1] - phi[in2]).abs() <= EXACT_TOL;
                if !ok {
                    violations.push(format!(
                        "gate {g}: comparison inputs colored {} and {}",
                        phi[in1], phi[in2]
                    ));
                }
                ok
            }
            Gate::MulAdd { xi, zeta, in1, in2, out } => {
                if phi[out] == 0.0 {
                    return Err(Error::InvalidColoring(format!(
                        "gate {g}: output node colored 0"
                    )));
                }
                let mut ok = true;
                for (label, input, param) in [("first", in1, xi), ("second", in2, zeta)] {
                    let want = coloring_scale(param) * phi[out];
                    if (phi[input] - want).abs() > EXACT_TOL {
                        violations.push(format!(
                            "gate {g}: {label} input colored {}, expected {want}",
                            phi[input]
                        ));
                        ok = false;
                    }
                }
                ok
            }
            _ => {
                return Err(Error::InvalidCircuit(format!(
                    "gate {g} is not a base gate; normalize the circuit first"
                )))
            }
        };
        gate_valid.push(ok);
    }
    Ok(ColoringReport { valid: violations.is_empty(), gate_valid, violations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoringStats {
    /// chain granularity: the smallest `4 / 2^n >= sqrt(eps)`
    pub epsilon_prime: f64,
    /// identity-chain nodes added per scaled-sum input
    pub chain_nodes_per_input: usize,
    /// identity-chain gates added per scaled-sum input
    pub chain_gates_per_input: usize,
    /// scaled-sum gates that were rewired
    pub rewired_gates: usize,
}

/// Rebuilds a normalized circuit into an equivalent one that admits a valid
/// coloring with range inside `[-1/2, -1/4] u [1/4, 1/2]`, and returns that
/// coloring.
///
/// Original nodes keep color 1/4. Every scaled-sum gate is rewired to fresh
/// input nodes colored compatibly, and each fresh input is tied to the
/// original by an identity chain: a pinned unit node, a ladder of constant
/// thresholds compared against the original, and a binary averaging tree
/// that reconstructs the value on the other side of the comparison cut. Any
/// assignment that approximately satisfies the chain forces the two ends
/// within `66 sqrt(eps)` of each other.
pub fn make_valid_coloring(
    circuit: &GeneralizedCircuit,
    epsilon: f64,
) -> Result<(GeneralizedCircuit, Coloring, ColoringStats)> {
    if !circuit.is_base() {
        return Err(Error::InvalidCircuit(
            "coloring construction expects a normalized circuit".into(),
        ));
    }
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "accuracy must lie in (0, 1), got {epsilon}"
        )));
    }
    circuit.validate()?;
    // largest power of two <= 4 / sqrt(eps); eps < 1 keeps rungs >= 4
    let rungs = {
        let bound = 4.0 / epsilon.sqrt();
        let mut p = 1usize;
        while (2 * p) as f64 <= bound {
            p *= 2;
        }
        p
    };
    let eps_prime = 4.0 / rungs as f64;

    let mut out =
        GeneralizedCircuit { node_names: circuit.node_names.clone(), gates: Vec::new() };
    let mut phi = vec![0.25; circuit.num_nodes()];
    let mut rewired = 0;
    let mut chain_nodes = 0;
    let mut chain_gates = 0;
    for (g, gate) in circuit.gates.iter().enumerate() {
        match *gate {
            Gate::MulAdd { xi, zeta, in1, in2, out: o } => {
                rewired += 1;
                let fresh1 = out.add_node(format!("__g{g}_in1"));
                phi.push(coloring_scale(xi) * 0.25);
                let fresh2 = out.add_node(format!("__g{g}_in2"));
                phi.push(coloring_scale(zeta) * 0.25);
                out.gates.push(Gate::MulAdd { xi, zeta, in1: fresh1, in2: fresh2, out: o });
                let (n1, g1) =
                    append_identity_chain(&mut out, &mut phi, in1, fresh1, rungs, eps_prime, &format!("g{g}a"));
                let (n2, g2) =
                    append_identity_chain(&mut out, &mut phi, in2, fresh2, rungs, eps_prime, &format!("g{g}b"));
                chain_nodes = n1.max(n2).max(chain_nodes);
                chain_gates = g1.max(g2).max(chain_gates);
            }
            ref other => out.gates.push(other.clone()),
        }
    }
    out.validate()?;
    let coloring = Coloring { values: phi };
    let report = check_coloring(&out, &coloring)?;
    debug_assert!(report.valid, "constructed coloring failed validity: {:?}", report.violations);
    Ok((
        out,
        coloring,
        ColoringStats {
            epsilon_prime: eps_prime,
            chain_nodes_per_input: chain_nodes,
            chain_gates_per_input: chain_gates,
            rewired_gates: rewired,
        },
    ))
}

/// Appends the identity chain tying `to` to `from` and extends the coloring
/// over the fresh nodes (threshold side keeps `from`'s color, reconstruction
/// side takes `to`'s). Returns `(nodes added, gates added)`.
pub(crate) fn append_identity_chain(
    circuit: &mut GeneralizedCircuit,
    phi: &mut Vec<f64>,
    from: NodeId,
    to: NodeId,
    rungs: usize,
    eps_prime: f64,
    tag: &str,
) -> (usize, usize) {
    let nodes_before = circuit.num_nodes();
    let gates_before = circuit.gates.len();
    let phi_from = phi[from];
    let phi_to = phi[to];

    let unit = circuit.add_node(format!("__c{tag}_one"));
    phi.push(phi_from);
    circuit.gates.push(Gate::Assign { value: true, out: unit });

    // threshold ladder: sigma_k holds k * eps'/4, compared against `from`
    let mut layer: Vec<NodeId> = Vec::with_capacity(rungs);
    for k in 1..=rungs {
        let scale = k as f64 * eps_prime / 8.0;
        let sigma = circuit.add_node(format!("__c{tag}_t{k}"));
        phi.push(phi_from);
        circuit.gates.push(Gate::MulAdd { xi: scale, zeta: scale, in1: unit, in2: unit, out: sigma });
        let b = circuit.add_node(format!("__c{tag}_b{k}"));
        phi.push(phi_to);
        circuit.gates.push(Gate::Less { in1: sigma, in2: from, out: b });
        layer.push(b);
    }
    // averaging tree down to one node
    let mut level = 1usize;
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len() / 2);
        for (k, pair) in layer.chunks(2).enumerate() {
            let d = circuit.add_node(format!("__c{tag}_d{level}_{k}"));
            phi.push(phi_to);
            circuit.gates.push(Gate::MulAdd {
                xi: 0.5,
                zeta: 0.5,
                in1: pair[0],
                in2: pair[1],
                out: d,
            });
            next.push(d);
        }
        layer = next;
        level += 1;
    }
    circuit.gates.push(Gate::MulAdd { xi: 0.5, zeta: 0.5, in1: layer[0], in2: layer[0], out: to });
    (circuit.num_nodes() - nodes_before, circuit.gates.len() - gates_before)
}

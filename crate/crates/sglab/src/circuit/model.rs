use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type NodeId = usize;

/// Gates of a generalized circuit. The base set is `Assign`, `MulAdd`
/// (clamped scaled sum), and `Less`; everything below them desugars into
/// the base set via [`super::normalize_circuit`]. Inputs may repeat.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// output pinned to a boolean constant
    Assign { value: bool, out: NodeId },
    /// `out = clamp(xi * in1 + zeta * in2, 0, 1)`, `xi, zeta` in `[-1, 1]`
    MulAdd { xi: f64, zeta: f64, in1: NodeId, in2: NodeId, out: NodeId },
    /// `out ~ 1` when `in1 < in2` by a margin, `~ 0` when `in1 > in2`
    Less { in1: NodeId, in2: NodeId, out: NodeId },
    /// extended: `out = zeta * input`, `zeta` in `[-1, 1]`
    Mul { zeta: f64, input: NodeId, out: NodeId },
    /// extended: copy
    Eq { input: NodeId, out: NodeId },
    /// extended: clamped sum
    Plus { in1: NodeId, in2: NodeId, out: NodeId },
    /// extended: clamped difference
    Minus { in1: NodeId, in2: NodeId, out: NodeId },
    Or { in1: NodeId, in2: NodeId, out: NodeId },
    And { in1: NodeId, in2: NodeId, out: NodeId },
    Not { input: NodeId, out: NodeId },
    /// extended: output pinned to a real constant in `[0, 1]`
    AssignReal { value: f64, out: NodeId },
}

impl Gate {
    pub fn output(&self) -> NodeId {
        match *self {
            Gate::Assign { out, .. }
            | Gate::MulAdd { out, .. }
            | Gate::Less { out, .. }
            | Gate::Mul { out, .. }
            | Gate::Eq { out, .. }
            | Gate::Plus { out, .. }
            | Gate::Minus { out, .. }
            | Gate::Or { out, .. }
            | Gate::And { out, .. }
            | Gate::Not { out, .. }
            | Gate::AssignReal { out, .. } => out,
        }
    }

    pub fn inputs(&self) -> Vec<NodeId> {
        match *self {
            Gate::Assign { .. } | Gate::AssignReal { .. } => vec![],
            Gate::Mul { input, .. } | Gate::Eq { input, .. } | Gate::Not { input, .. } => {
                vec![input]
            }
            Gate::MulAdd { in1, in2, .. }
            | Gate::Less { in1, in2, .. }
            | Gate::Plus { in1, in2, .. }
            | Gate::Minus { in1, in2, .. }
            | Gate::Or { in1, in2, .. }
            | Gate::And { in1, in2, .. } => vec![in1, in2],
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Gate::Assign { .. } | Gate::MulAdd { .. } | Gate::Less { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralizedCircuit {
    pub node_names: Vec<String>,
    pub gates: Vec<Gate>,
}

impl GeneralizedCircuit {
    pub fn num_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> NodeId {
        self.node_names.push(name.into());
        self.node_names.len() - 1
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn is_base(&self) -> bool {
        self.gates.iter().all(Gate::is_base)
    }

    /// Map from node to the gate computing it. Errors when two gates share
    /// an output node.
    pub fn output_map(&self) -> Result<Vec<Option<usize>>> {
        let mut map = vec![None; self.num_nodes()];
        for (g, gate) in self.gates.iter().enumerate() {
            let out = gate.output();
            if out >= map.len() {
                return Err(Error::InvalidCircuit(format!(
                    "gate {g} outputs unknown node {out}"
                )));
            }
            if let Some(prev) = map[out] {
                return Err(Error::InvalidCircuit(format!(
                    "node `{}` is the output of gates {prev} and {g}",
                    self.node_names[out]
                )));
            }
            map[out] = Some(g);
        }
        Ok(map)
    }

    /// Structural and parameter-range checks.
    pub fn validate(&self) -> Result<()> {
        self.output_map()?;
        for (g, gate) in self.gates.iter().enumerate() {
            for v in gate.inputs() {
                if v >= self.num_nodes() {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {g} reads unknown node {v}"
                    )));
                }
            }
            match *gate {
                Gate::MulAdd { xi, zeta, .. } => {
                    if !(-1.0..=1.0).contains(&xi) || !(-1.0..=1.0).contains(&zeta) {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: scaled-sum parameters ({xi}, {zeta}) outside [-1, 1]"
                        )));
                    }
                }
                Gate::Mul { zeta, .. } => {
                    if !(-1.0..=1.0).contains(&zeta) {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: scale {zeta} outside [-1, 1]"
                        )));
                    }
                }
                Gate::AssignReal { value, .. } if !(0.0..=1.0).contains(&value) => {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {g}: constant {value} outside [0, 1]"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> CircuitFile {
        let name = |id: NodeId| self.node_names[id].clone();
        CircuitFile {
            nodes: self.node_names.clone(),
            gates: self
                .gates
                .iter()
                .map(|gate| match *gate {
                    Gate::Assign { value, out } => GateFile {
                        kind: "assign".into(),
                        params: vec![if value { 1.0 } else { 0.0 }],
                        inputs: vec![],
                        output: name(out),
                    },
                    Gate::MulAdd { xi, zeta, in1, in2, out } => GateFile {
                        kind: "muladd".into(),
                        params: vec![xi, zeta],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::Less { in1, in2, out } => GateFile {
                        kind: "less".into(),
                        params: vec![],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::Mul { zeta, input, out } => GateFile {
                        kind: "mul".into(),
                        params: vec![zeta],
                        inputs: vec![name(input)],
                        output: name(out),
                    },
                    Gate::Eq { input, out } => GateFile {
                        kind: "eq".into(),
                        params: vec![],
                        inputs: vec![name(input)],
                        output: name(out),
                    },
                    Gate::Plus { in1, in2, out } => GateFile {
                        kind: "plus".into(),
                        params: vec![],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::Minus { in1, in2, out } => GateFile {
                        kind: "minus".into(),
                        params: vec![],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::Or { in1, in2, out } => GateFile {
                        kind: "or".into(),
                        params: vec![],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::And { in1, in2, out } => GateFile {
                        kind: "and".into(),
                        params: vec![],
                        inputs: vec![name(in1), name(in2)],
                        output: name(out),
                    },
                    Gate::Not { input, out } => GateFile {
                        kind: "not".into(),
                        params: vec![],
                        inputs: vec![name(input)],
                        output: name(out),
                    },
                    Gate::AssignReal { value, out } => GateFile {
                        kind: "assign_real".into(),
                        params: vec![value],
                        inputs: vec![],
                        output: name(out),
                    },
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CircuitFile) -> Result<Self> {
        let mut circuit =
            GeneralizedCircuit { node_names: file.nodes.clone(), gates: Vec::new() };
        let ids: BTreeMap<&str, NodeId> = file
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if ids.len() != file.nodes.len() {
            return Err(Error::InvalidCircuit("duplicate node names".into()));
        }
        let lookup = |name: &str| -> Result<NodeId> {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::InvalidCircuit(format!("unknown node `{name}`")))
        };
        for (g, gate) in file.gates.iter().enumerate() {
            let arity_error = || {
                Error::InvalidCircuit(format!(
                    "gate {g} ({}) has wrong inputs or parameters",
                    gate.kind
                ))
            };
            let input = |k: usize| -> Result<NodeId> {
                lookup(gate.inputs.get(k).ok_or_else(arity_error)?)
            };
            let param = |k: usize| -> Result<f64> {
                gate.params.get(k).copied().ok_or_else(arity_error)
            };
            let out = lookup(&gate.output)?;
            let parsed = match gate.kind.as_str() {
                "assign" => {
                    let v = param(0)?;
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {g}: assign constant must be 0 or 1, got {v}"
                        )));
                    }
                    Gate::Assign { value: v == 1.0, out }
                }
                "muladd" => Gate::MulAdd { xi: param(0)?, zeta: param(1)?, in1: input(0)?, in2: input(1)?, out },
                "less" => Gate::Less { in1: input(0)?, in2: input(1)?, out },
                "mul" => Gate::Mul { zeta: param(0)?, input: input(0)?, out },
                "eq" => Gate::Eq { input: input(0)?, out },
                "plus" => Gate::Plus { in1: input(0)?, in2: input(1)?, out },
                "minus" => Gate::Minus { in1: input(0)?, in2: input(1)?, out },
                "or" => Gate::Or { in1: input(0)?, in2: input(1)?, out },
                "and" => Gate::And { in1: input(0)?, in2: input(1)?, out },
                "not" => Gate::Not { input: input(0)?, out },
                "assign_real" => Gate::AssignReal { value: param(0)?, out },
                other => {
                    return Err(Error::InvalidCircuit(format!("unknown gate kind `{other}`")))
                }
            };
            circuit.gates.push(parsed);
        }
        circuit.validate()?;
        Ok(circuit)
    }
}

/// On-disk circuit format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitFile {
    pub nodes: Vec<String>,
    pub gates: Vec<GateFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    pub output: String,
}

/// Real label per node, as used by the 2-player compilation.
#[derive(Debug, Clone, PartialEq)]
pub struct Coloring {
    pub values: Vec<f64>,
}

/// Candidate solution: a value in `[0, 1]` per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<f64>,
}

impl Assignment {
    pub fn to_named(&self, circuit: &GeneralizedCircuit) -> BTreeMap<String, f64> {
        circuit
            .node_names
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }

    pub fn from_named(circuit: &GeneralizedCircuit, named: &BTreeMap<String, f64>) -> Result<Self> {
        let values = circuit
            .node_names
            .iter()
            .map(|n| {
                let v = named
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::InvalidCircuit(format!("assignment misses node `{n}`")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidCircuit(format!(
                        "assignment value {v} for node `{n}` outside [0, 1]"
                    )));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }
}

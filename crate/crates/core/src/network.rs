//! Feed-forward evaluation plans compiled from genomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::genome::{Genome, GenomeError, NodeId, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    /// Logistic with a 5x steepened input, clamped to avoid overflow.
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => {
                let z = (5.0 * z).clamp(-60.0, 60.0);
                1.0 / (1.0 + (-z).exp())
            }
            Activation::Tanh => (2.5 * z).clamp(-60.0, 60.0).tanh(),
            Activation::Relu => z.max(0.0),
        }
    }
}

impl FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(Self::Identity),
            "sigmoid" => Ok(Self::Sigmoid),
            "tanh" => Ok(Self::Tanh),
            "relu" => Ok(Self::Relu),
            _ => Err(format!("unknown activation `{s}`")),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::Sigmoid => "sigmoid",
            Self::Tanh => "tanh",
            Self::Relu => "relu",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregation {
    Sum,
}

impl FromStr for Aggregation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sum" => Ok(Self::Sum),
            _ => Err(format!("unknown aggregation `{s}`")),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("sum")
    }
}

#[derive(Clone, Debug)]
struct NodeEval {
    slot: usize,
    bias: f64,
    response: f64,
    activation: Activation,
    incoming: Vec<(usize, f64)>,
}

/// Topologically ordered evaluation plan.
///
/// Slots `0..num_inputs` hold the inputs in input-id order; every non-input
/// node is evaluated once, after all of its enabled predecessors. Nodes that
/// no input reaches still run and produce `activation(bias)`.
#[derive(Clone, Debug)]
pub struct FeedforwardNetwork {
    num_inputs: usize,
    plan: Vec<NodeEval>,
    output_slots: Vec<usize>,
    num_slots: usize,
}

impl FeedforwardNetwork {
    pub fn compile(genome: &Genome) -> Result<Self, GenomeError> {
        let mut slot_of: BTreeMap<NodeId, usize> = BTreeMap::new();
        let inputs: Vec<&_> = genome.nodes.iter().filter(|n| n.kind == NodeKind::Input).collect();
        for (i, n) in inputs.iter().enumerate() {
            slot_of.insert(n.id, i);
        }
        let mut next = inputs.len();
        for n in genome.nodes.iter().filter(|n| n.kind != NodeKind::Input) {
            slot_of.insert(n.id, next);
            next += 1;
        }

        let mut incoming: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
        let mut indegree: BTreeMap<NodeId, usize> = genome
            .nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Input)
            .map(|n| (n.id, 0))
            .collect();
        let mut successors: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for c in genome.connections.iter().filter(|c| c.enabled) {
            if !slot_of.contains_key(&c.in_node) || !slot_of.contains_key(&c.out_node) {
                return Err(GenomeError::DanglingConnection(c.innovation));
            }
            incoming.entry(c.out_node).or_default().push((c.in_node, c.weight));
            if let Some(d) = indegree.get_mut(&c.out_node) {
                // Edges out of input nodes are satisfied from the start.
                if genome.node(c.in_node).map(|n| n.kind) != Some(NodeKind::Input) {
                    *d += 1;
                    successors.entry(c.in_node).or_default().push(c.out_node);
                }
            } else {
                return Err(GenomeError::EdgeIntoInput(c.innovation));
            }
        }

        let mut ready: BTreeSet<NodeId> =
            indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
        let mut plan = Vec::with_capacity(indegree.len());
        while let Some(id) = ready.pop_first() {
            let node = genome.node(id).expect("node present");
            plan.push(NodeEval {
                slot: slot_of[&id],
                bias: node.bias,
                response: node.response,
                activation: node.activation,
                incoming: incoming
                    .get(&id)
                    .map(|v| v.iter().map(|&(src, w)| (slot_of[&src], w)).collect())
                    .unwrap_or_default(),
            });
            if let Some(succ) = successors.get(&id) {
                for s in succ {
                    let d = indegree.get_mut(s).expect("tracked");
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(*s);
                    }
                }
            }
        }
        if plan.len() != indegree.len() {
            return Err(GenomeError::Cycle);
        }

        let output_slots = genome
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Output)
            .map(|n| slot_of[&n.id])
            .collect();
        Ok(Self {
            num_inputs: inputs.len(),
            plan,
            output_slots,
            num_slots: next,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.output_slots.len()
    }

    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>, GenomeError> {
        let mut scratch = vec![0.0; self.num_slots];
        let mut out = vec![0.0; self.output_slots.len()];
        self.activate_into(inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Allocation-free evaluation; `scratch` is resized as needed.
    pub fn activate_into(
        &self,
        inputs: &[f64],
        scratch: &mut Vec<f64>,
        outputs: &mut [f64],
    ) -> Result<(), GenomeError> {
        if inputs.len() != self.num_inputs {
            return Err(GenomeError::InputArity {
                expected: self.num_inputs,
                got: inputs.len(),
            });
        }
        scratch.resize(self.num_slots, 0.0);
        scratch[..self.num_inputs].copy_from_slice(inputs);
        for node in &self.plan {
            let sum: f64 = node.incoming.iter().map(|&(s, w)| w * scratch[s]).sum();
            scratch[node.slot] = node.activation.apply(node.bias + node.response * sum);
        }
        for (o, &s) in outputs.iter_mut().zip(&self.output_slots) {
            *o = scratch[s];
        }
        Ok(())
    }
}

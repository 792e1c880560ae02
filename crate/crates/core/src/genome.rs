//! Genome encoding: node and connection genes, historical markers,
//! structural and parametric mutation, and crossover.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{InitialConnection, NeatConfig};
use crate::network::{Activation, Aggregation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

/// Historical marker shared by every copy of a structural gene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Innovation(pub u64);

#[derive(Debug, Error, PartialEq)]
pub enum GenomeError {
    #[error("enabled connections form a cycle")]
    Cycle,
    #[error("connection {0:?} references a missing node")]
    DanglingConnection(Innovation),
    #[error("connection {0:?} targets an input node")]
    EdgeIntoInput(Innovation),
    #[error("expected {expected} network inputs, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error("genome decode: {0}")]
    Decode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: NodeId,
    pub kind: NodeKind,
    pub bias: f64,
    pub response: f64,
    pub activation: Activation,
    pub aggregation: Aggregation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub innovation: Innovation,
    pub in_node: NodeId,
    pub out_node: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// Nodes sorted by id, connections sorted by innovation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub key: u64,
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    pub fitness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SplitRecord {
    split: Innovation,
    nodes: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RegistryRepr {
    next_innovation: u64,
    next_node: u32,
    connections: Vec<(NodeId, NodeId, Innovation)>,
    splits: Vec<SplitRecord>,
}

/// Hands out innovation numbers and node ids.
///
/// An `(in, out)` pair always maps to the same innovation, and splitting a
/// given connection yields the same new node for every genome that does not
/// already own that node. Both hold across generations, which is stronger
/// than the per-generation consistency crossover alignment needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RegistryRepr", from = "RegistryRepr")]
pub struct InnovationRegistry {
    next_innovation: u64,
    next_node: u32,
    connections: BTreeMap<(NodeId, NodeId), Innovation>,
    splits: BTreeMap<Innovation, Vec<NodeId>>,
}

impl From<InnovationRegistry> for RegistryRepr {
    fn from(r: InnovationRegistry) -> Self {
        RegistryRepr {
            next_innovation: r.next_innovation,
            next_node: r.next_node,
            connections: r.connections.into_iter().map(|((a, b), i)| (a, b, i)).collect(),
            splits: r
                .splits
                .into_iter()
                .map(|(split, nodes)| SplitRecord { split, nodes })
                .collect(),
        }
    }
}

impl From<RegistryRepr> for InnovationRegistry {
    fn from(r: RegistryRepr) -> Self {
        InnovationRegistry {
            next_innovation: r.next_innovation,
            next_node: r.next_node,
            connections: r.connections.into_iter().map(|(a, b, i)| ((a, b), i)).collect(),
            splits: r.splits.into_iter().map(|s| (s.split, s.nodes)).collect(),
        }
    }
}

impl InnovationRegistry {
    /// Reserves ids for inputs, outputs and the initial hidden layer.
    pub fn new(config: &NeatConfig) -> Self {
        Self {
            next_innovation: 0,
            next_node: (config.num_inputs + config.num_outputs + config.num_hidden) as u32,
            connections: BTreeMap::new(),
            splits: BTreeMap::new(),
        }
    }

    pub fn connection_innovation(&mut self, in_node: NodeId, out_node: NodeId) -> Innovation {
        let next = &mut self.next_innovation;
        *self.connections.entry((in_node, out_node)).or_insert_with(|| {
            let i = Innovation(*next);
            *next += 1;
            i
        })
    }

    /// Node id for splitting `split`, skipping ids `owned` already reports.
    pub fn split_node(&mut self, split: Innovation, owned: impl Fn(NodeId) -> bool) -> NodeId {
        let records = self.splits.entry(split).or_default();
        if let Some(&n) = records.iter().find(|&&n| !owned(n)) {
            return n;
        }
        let n = NodeId(self.next_node);
        self.next_node += 1;
        records.push(n);
        n
    }

    pub fn next_innovation(&self) -> u64 {
        self.next_innovation
    }

    pub fn lookup(&self, in_node: NodeId, out_node: NodeId) -> Option<Innovation> {
        self.connections.get(&(in_node, out_node)).copied()
    }
}

fn draw_clamped<R: Rng + ?Sized>(rng: &mut R, mean: f64, stdev: f64, lo: f64, hi: f64) -> f64 {
    let v = if stdev > 0.0 {
        Normal::new(mean, stdev).expect("finite stdev").sample(rng)
    } else {
        mean
    };
    v.clamp(lo, hi)
}

/// One scalar gene attribute: replace, else perturb, then clamp.
#[allow(clippy::too_many_arguments)]
fn mutate_scalar<R: Rng + ?Sized>(
    rng: &mut R,
    value: f64,
    replace_rate: f64,
    mutate_rate: f64,
    power: f64,
    init_mean: f64,
    init_stdev: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    if replace_rate > 0.0 && rng.random::<f64>() < replace_rate {
        return draw_clamped(rng, init_mean, init_stdev, lo, hi);
    }
    if mutate_rate > 0.0 && rng.random::<f64>() < mutate_rate {
        let delta = if power > 0.0 {
            Normal::new(0.0, power).expect("finite power").sample(rng)
        } else {
            0.0
        };
        return (value + delta).clamp(lo, hi);
    }
    value
}

impl NodeGene {
    pub fn input(id: NodeId) -> Self {
        Self {
            id,
            kind: NodeKind::Input,
            bias: 0.0,
            response: 1.0,
            activation: Activation::Identity,
            aggregation: Aggregation::Sum,
        }
    }

    fn random<R: Rng + ?Sized>(id: NodeId, kind: NodeKind, cfg: &NeatConfig, rng: &mut R) -> Self {
        let bias = draw_clamped(rng, cfg.bias_init_mean, cfg.bias_init_stdev, cfg.bias_min_value, cfg.bias_max_value);
        let response = draw_clamped(
            rng,
            cfg.response_init_mean,
            cfg.response_init_stdev,
            cfg.response_min_value,
            cfg.response_max_value,
        );
        Self {
            id,
            kind,
            bias,
            response,
            activation: cfg.activation_default,
            aggregation: cfg.aggregation_default,
        }
    }
}

impl Genome {
    /// Assembles a genome from unordered parts, sorting genes into canonical order.
    pub fn from_parts(key: u64, mut nodes: Vec<NodeGene>, mut connections: Vec<ConnectionGene>) -> Self {
        nodes.sort_by_key(|n| n.id);
        connections.sort_by_key(|c| c.innovation);
        Self {
            key,
            nodes,
            connections,
            fitness: None,
        }
    }

    /// Fresh genome wired according to `initial_connection`.
    pub fn new_initial<R: Rng + ?Sized>(
        key: u64,
        cfg: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Self {
        let n_in = cfg.num_inputs as u32;
        let n_out = cfg.num_outputs as u32;
        let inputs: Vec<NodeId> = (0..n_in).map(NodeId).collect();
        let outputs: Vec<NodeId> = (n_in..n_in + n_out).map(NodeId).collect();
        let hidden: Vec<NodeId> = (n_in + n_out..n_in + n_out + cfg.num_hidden as u32).map(NodeId).collect();

        let mut nodes: Vec<NodeGene> = inputs.iter().map(|&id| NodeGene::input(id)).collect();
        nodes.extend(outputs.iter().map(|&id| NodeGene::random(id, NodeKind::Output, cfg, rng)));
        nodes.extend(hidden.iter().map(|&id| NodeGene::random(id, NodeKind::Hidden, cfg, rng)));

        let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
        match cfg.initial_connection {
            InitialConnection::Unconnected => {}
            InitialConnection::FullDirect | InitialConnection::FullNoDirect => {
                for &i in &inputs {
                    pairs.extend(hidden.iter().map(|&h| (i, h)));
                }
                for &h in &hidden {
                    pairs.extend(outputs.iter().map(|&o| (h, o)));
                }
                if cfg.initial_connection == InitialConnection::FullDirect || hidden.is_empty() {
                    for &i in &inputs {
                        pairs.extend(outputs.iter().map(|&o| (i, o)));
                    }
                }
            }
        }
        let connections = pairs
            .into_iter()
            .map(|(a, b)| ConnectionGene {
                innovation: registry.connection_innovation(a, b),
                in_node: a,
                out_node: b,
                weight: draw_clamped(
                    rng,
                    cfg.weight_init_mean,
                    cfg.weight_init_stdev,
                    cfg.weight_min_value,
                    cfg.weight_max_value,
                ),
                enabled: cfg.enabled_default,
            })
            .collect();
        Self::from_parts(key, nodes, connections)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.nodes.binary_search_by_key(&id, |n| n.id).is_ok()
    }

    pub fn connection(&self, innovation: Innovation) -> Option<&ConnectionGene> {
        self.connections
            .binary_search_by_key(&innovation, |c| c.innovation)
            .ok()
            .map(|i| &self.connections[i])
    }

    fn insert_node(&mut self, node: NodeGene) {
        match self.nodes.binary_search_by_key(&node.id, |n| n.id) {
            Ok(i) => self.nodes[i] = node,
            Err(i) => self.nodes.insert(i, node),
        }
    }

    fn insert_connection(&mut self, conn: ConnectionGene) {
        match self.connections.binary_search_by_key(&conn.innovation, |c| c.innovation) {
            Ok(i) => self.connections[i] = conn,
            Err(i) => self.connections.insert(i, conn),
        }
    }

    pub fn num_enabled(&self) -> usize {
        self.connections.iter().filter(|c| c.enabled).count()
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    /// Enabled weights plus bias and response of every non-input node.
    pub fn parameter_count(&self) -> usize {
        let non_input = self.nodes.iter().filter(|n| n.kind != NodeKind::Input).count();
        self.num_enabled() + 2 * non_input
    }

    /// True when `from` reaches `to` over any connection gene, enabled or not.
    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let mut succ: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for c in &self.connections {
            succ.entry(c.in_node).or_default().push(c.out_node);
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                if let Some(next) = succ.get(&n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        false
    }

    /// Acyclicity of the full connection graph (disabled genes included).
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: BTreeMap<NodeId, usize> = self.nodes.iter().map(|n| (n.id, 0)).collect();
        let mut succ: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for c in &self.connections {
            *indeg.entry(c.out_node).or_default() += 1;
            indeg.entry(c.in_node).or_default();
            succ.entry(c.in_node).or_default().push(c.out_node);
        }
        let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
        let mut visited = 0;
        while let Some(n) = ready.pop() {
            visited += 1;
            for s in succ.get(&n).into_iter().flatten() {
                let d = indeg.get_mut(s).expect("tracked");
                *d -= 1;
                if *d == 0 {
                    ready.push(*s);
                }
            }
        }
        visited == indeg.len()
    }

    /// Parametric mutation of every gene: weights, enabled flags, node
    /// biases, responses, activation and aggregation.
    pub fn mutate_weights<R: Rng + ?Sized>(&mut self, cfg: &NeatConfig, rng: &mut R) {
        for c in &mut self.connections {
            c.weight = mutate_scalar(
                rng,
                c.weight,
                cfg.weight_replace_rate,
                cfg.weight_mutate_rate,
                cfg.weight_mutate_power,
                cfg.weight_init_mean,
                cfg.weight_init_stdev,
                cfg.weight_min_value,
                cfg.weight_max_value,
            );
            if cfg.enabled_mutate_rate > 0.0 && rng.random::<f64>() < cfg.enabled_mutate_rate {
                c.enabled = !c.enabled;
            }
        }
        for n in self.nodes.iter_mut().filter(|n| n.kind != NodeKind::Input) {
            n.bias = mutate_scalar(
                rng,
                n.bias,
                cfg.bias_replace_rate,
                cfg.bias_mutate_rate,
                cfg.bias_mutate_power,
                cfg.bias_init_mean,
                cfg.bias_init_stdev,
                cfg.bias_min_value,
                cfg.bias_max_value,
            );
            n.response = mutate_scalar(
                rng,
                n.response,
                cfg.response_replace_rate,
                cfg.response_mutate_rate,
                cfg.response_mutate_power,
                cfg.response_init_mean,
                cfg.response_init_stdev,
                cfg.response_min_value,
                cfg.response_max_value,
            );
            if cfg.activation_mutate_rate > 0.0 && rng.random::<f64>() < cfg.activation_mutate_rate {
                if let Some(&a) = cfg.activation_options.choose(rng) {
                    n.activation = a;
                }
            }
            if cfg.aggregation_mutate_rate > 0.0 && rng.random::<f64>() < cfg.aggregation_mutate_rate {
                if let Some(&a) = cfg.aggregation_options.choose(rng) {
                    n.aggregation = a;
                }
            }
        }
    }

    /// Splits a uniformly chosen enabled connection `a→b` into `a→n` (weight 1)
    /// and `n→b` (old weight). The new node has bias 0 and response 1, so
    /// identity-activated networks compute the same function afterwards.
    pub fn mutate_add_node<R: Rng + ?Sized>(
        &mut self,
        cfg: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Option<NodeId> {
        let enabled: Vec<usize> = (0..self.connections.len()).filter(|&i| self.connections[i].enabled).collect();
        let &idx = enabled.choose(rng)?;
        let old = self.connections[idx].clone();
        self.connections[idx].enabled = false;

        let new_id = registry.split_node(old.innovation, |n| self.has_node(n));
        self.insert_node(NodeGene {
            id: new_id,
            kind: NodeKind::Hidden,
            bias: 0.0,
            response: 1.0,
            activation: cfg.activation_default,
            aggregation: cfg.aggregation_default,
        });
        self.insert_connection(ConnectionGene {
            innovation: registry.connection_innovation(old.in_node, new_id),
            in_node: old.in_node,
            out_node: new_id,
            weight: 1.0,
            enabled: true,
        });
        self.insert_connection(ConnectionGene {
            innovation: registry.connection_innovation(new_id, old.out_node),
            in_node: new_id,
            out_node: old.out_node,
            weight: old.weight,
            enabled: true,
        });
        Some(new_id)
    }

    /// Whether `in_node → out_node` may be added: source is not an output,
    /// target is not an input, the pair is new, and no cycle results.
    pub fn is_legal_new_connection(&self, in_node: NodeId, out_node: NodeId) -> bool {
        let (Some(a), Some(b)) = (self.node(in_node), self.node(out_node)) else {
            return false;
        };
        if a.kind == NodeKind::Output || b.kind == NodeKind::Input || in_node == out_node {
            return false;
        }
        if self.connections.iter().any(|c| c.in_node == in_node && c.out_node == out_node) {
            return false;
        }
        !self.reaches(out_node, in_node)
    }

    /// Links a random unconnected pair; gives up after a bounded number of draws.
    pub fn mutate_add_connection<R: Rng + ?Sized>(
        &mut self,
        cfg: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Option<Innovation> {
        const ATTEMPTS: usize = 32;
        let sources: Vec<NodeId> = self.nodes.iter().filter(|n| n.kind != NodeKind::Output).map(|n| n.id).collect();
        let targets: Vec<NodeId> = self.nodes.iter().filter(|n| n.kind != NodeKind::Input).map(|n| n.id).collect();
        if sources.is_empty() || targets.is_empty() {
            return None;
        }
        for _ in 0..ATTEMPTS {
            let a = *sources.choose(rng)?;
            let b = *targets.choose(rng)?;
            if !self.is_legal_new_connection(a, b) {
                continue;
            }
            let innovation = registry.connection_innovation(a, b);
            let weight = draw_clamped(
                rng,
                cfg.weight_init_mean,
                cfg.weight_init_stdev,
                cfg.weight_min_value,
                cfg.weight_max_value,
            );
            self.insert_connection(ConnectionGene {
                innovation,
                in_node: a,
                out_node: b,
                weight,
                enabled: true,
            });
            return Some(innovation);
        }
        None
    }

    /// Removes a random hidden node and every connection touching it.
    pub fn delete_node<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<NodeId> {
        let hidden: Vec<NodeId> = self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).map(|n| n.id).collect();
        let &victim = hidden.choose(rng)?;
        self.connections.retain(|c| c.in_node != victim && c.out_node != victim);
        self.nodes.retain(|n| n.id != victim);
        Some(victim)
    }

    pub fn delete_connection<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Innovation> {
        if self.connections.is_empty() {
            return None;
        }
        let idx = rng.random_range(0..self.connections.len());
        Some(self.connections.remove(idx).innovation)
    }

    /// Probability-gated deletions: a hidden node with `node_delete_prob`,
    /// then a connection with `conn_delete_prob`.
    pub fn mutate_delete<R: Rng + ?Sized>(&mut self, cfg: &NeatConfig, rng: &mut R) {
        if rng.random::<f64>() < cfg.node_delete_prob {
            self.delete_node(rng);
        }
        if rng.random::<f64>() < cfg.conn_delete_prob {
            self.delete_connection(rng);
        }
    }

    /// Full mutation pass used during reproduction: each structural
    /// operator fires at most once, then every gene is mutated parametrically.
    pub fn mutate<R: Rng + ?Sized>(&mut self, cfg: &NeatConfig, registry: &mut InnovationRegistry, rng: &mut R) {
        if rng.random::<f64>() < cfg.node_add_prob {
            self.mutate_add_node(cfg, registry, rng);
        }
        if rng.random::<f64>() < cfg.node_delete_prob {
            self.delete_node(rng);
        }
        if rng.random::<f64>() < cfg.conn_add_prob {
            self.mutate_add_connection(cfg, registry, rng);
        }
        if rng.random::<f64>() < cfg.conn_delete_prob {
            self.delete_connection(rng);
        }
        self.mutate_weights(cfg, rng);
    }

    /// Compact versioned binary encoding (see [`crate::codec`]).
    pub fn to_bytes(&self) -> Vec<u8> {
        crate::codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GenomeError> {
        crate::codec::decode(bytes)
    }
}

/// Probability that a gene disabled in either parent stays disabled.
pub const DISABLED_INHERIT_PROB: f64 = 0.75;

/// Gene alignment between two genomes by innovation number.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenePartition {
    pub matching: Vec<Innovation>,
    pub disjoint: Vec<Innovation>,
    pub excess: Vec<Innovation>,
    /// Mean |weight difference| over matching genes; 0 when none match.
    pub mean_weight_diff: f64,
}

pub fn partition(a: &Genome, b: &Genome) -> GenePartition {
    let max_a = a.connections.last().map(|c| c.innovation);
    let max_b = b.connections.last().map(|c| c.innovation);
    let mut out = GenePartition::default();
    let mut diff_sum = 0.0;
    let (mut i, mut j) = (0, 0);
    let classify = |innov: Innovation, other_max: Option<Innovation>, out: &mut GenePartition| match other_max {
        Some(m) if innov <= m => out.disjoint.push(innov),
        _ => out.excess.push(innov),
    };
    while i < a.connections.len() || j < b.connections.len() {
        match (a.connections.get(i), b.connections.get(j)) {
            (Some(ca), Some(cb)) if ca.innovation == cb.innovation => {
                out.matching.push(ca.innovation);
                diff_sum += (ca.weight - cb.weight).abs();
                i += 1;
                j += 1;
            }
            (Some(ca), Some(cb)) if ca.innovation < cb.innovation => {
                classify(ca.innovation, max_b, &mut out);
                i += 1;
            }
            (Some(_), Some(cb)) => {
                classify(cb.innovation, max_a, &mut out);
                j += 1;
            }
            (Some(ca), None) => {
                classify(ca.innovation, max_b, &mut out);
                i += 1;
            }
            (None, Some(cb)) => {
                classify(cb.innovation, max_a, &mut out);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    if !out.matching.is_empty() {
        out.mean_weight_diff = diff_sum / out.matching.len() as f64;
    }
    out
}

/// Child of `fitter` and `other`.
///
/// Matching genes come from either parent at random; disjoint and excess
/// genes come from `fitter` only. A gene disabled in either parent stays
/// disabled with probability [`DISABLED_INHERIT_PROB`].
pub fn crossover<R: Rng + ?Sized>(fitter: &Genome, other: &Genome, key: u64, rng: &mut R) -> Genome {
    let mut connections = Vec::with_capacity(fitter.connections.len());
    for ca in &fitter.connections {
        let gene = match other.connection(ca.innovation) {
            Some(cb) => {
                let mut g = if rng.random::<bool>() { ca.clone() } else { cb.clone() };
                if !ca.enabled || !cb.enabled {
                    g.enabled = rng.random::<f64>() >= DISABLED_INHERIT_PROB;
                }
                g
            }
            None => {
                let mut g = ca.clone();
                if !ca.enabled {
                    g.enabled = rng.random::<f64>() >= DISABLED_INHERIT_PROB;
                }
                g
            }
        };
        connections.push(gene);
    }
    let nodes = fitter
        .nodes
        .iter()
        .map(|na| match other.node(na.id) {
            Some(nb) if na.kind != NodeKind::Input => {
                let mut n = na.clone();
                if rng.random::<bool>() {
                    n.bias = nb.bias;
                }
                if rng.random::<bool>() {
                    n.response = nb.response;
                }
                if rng.random::<bool>() {
                    n.activation = nb.activation;
                }
                n
            }
            _ => na.clone(),
        })
        .collect();
    Genome {
        key,
        nodes,
        connections,
        fitness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn snake_genome(seed: u64) -> (Genome, InnovationRegistry, NeatConfig) {
        let cfg = NeatConfig::default();
        let mut reg = InnovationRegistry::new(&cfg);
        let g = Genome::new_initial(0, &cfg, &mut reg, &mut rng(seed));
        (g, reg, cfg)
    }

    fn bare(n_in: u32, n_hidden: u32, n_out: u32, edges: &[(u32, u32, f64)]) -> Genome {
        let mut nodes: Vec<NodeGene> = (0..n_in).map(|i| NodeGene::input(NodeId(i))).collect();
        for id in n_in..n_in + n_out {
            nodes.push(NodeGene { kind: NodeKind::Output, ..NodeGene::input(NodeId(id)) });
        }
        for id in n_in + n_out..n_in + n_out + n_hidden {
            nodes.push(NodeGene { kind: NodeKind::Hidden, ..NodeGene::input(NodeId(id)) });
        }
        let conns = edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b, w))| ConnectionGene {
                innovation: Innovation(k as u64),
                in_node: NodeId(a),
                out_node: NodeId(b),
                weight: w,
                enabled: true,
            })
            .collect();
        Genome::from_parts(0, nodes, conns)
    }

    #[test]
    fn initial_genome_shape() {
        let (g, _, _) = snake_genome(1);
        assert_eq!(g.nodes.iter().filter(|n| n.kind == NodeKind::Input).count(), 120);
        assert_eq!(g.nodes.iter().filter(|n| n.kind == NodeKind::Output).count(), 2);
        assert_eq!(g.hidden_count(), 40);
        assert_eq!(g.nodes.len() - 120, 42);
        assert_eq!(g.connections.len(), 120 * 40 + 40 * 2 + 120 * 2);
        assert!(g.connections.iter().all(|c| c.enabled && c.weight.abs() <= 30.0));
        assert!(g.is_acyclic());
    }

    #[test]
    fn no_hidden_layer_gives_direct_wiring() {
        let cfg = NeatConfig { num_hidden: 0, ..NeatConfig::default() };
        let mut reg = InnovationRegistry::new(&cfg);
        let g = Genome::new_initial(0, &cfg, &mut reg, &mut rng(3));
        assert_eq!(g.connections.len(), 240);
        assert_eq!(g.hidden_count(), 0);
    }

    #[test]
    fn initial_genome_is_seed_deterministic() {
        assert_eq!(snake_genome(9).0, snake_genome(9).0);
        assert_ne!(snake_genome(9).0, snake_genome(10).0);
    }

    #[test]
    fn weight_perturbation_clamps_at_bound() {
        let cfg = NeatConfig::default();
        // Find a seed whose first perturbation pushes 29.5 past the bound.
        let mut g = bare(1, 0, 1, &[(0, 1, 29.5)]);
        let cfg = NeatConfig {
            weight_replace_rate: 0.0,
            weight_mutate_rate: 1.0,
            enabled_mutate_rate: 0.0,
            bias_mutate_rate: 0.0,
            bias_replace_rate: 0.0,
            ..cfg
        };
        let mut r = rng(0);
        let mut saw_clamp = false;
        for _ in 0..200 {
            g.connections[0].weight = 29.5;
            g.mutate_weights(&cfg, &mut r);
            let w = g.connections[0].weight;
            assert!(w <= 30.0);
            saw_clamp |= w == 30.0;
        }
        assert!(saw_clamp);
        assert_eq!((29.5f64 + 4.0).clamp(-30.0, 30.0), 30.0);
    }

    #[test]
    fn zero_rates_leave_genome_unchanged() {
        let (mut g, _, cfg) = snake_genome(4);
        let cfg = NeatConfig {
            weight_mutate_rate: 0.0,
            weight_replace_rate: 0.0,
            bias_mutate_rate: 0.0,
            bias_replace_rate: 0.0,
            response_mutate_rate: 0.0,
            response_replace_rate: 0.0,
            enabled_mutate_rate: 0.0,
            activation_mutate_rate: 0.0,
            aggregation_mutate_rate: 0.0,
            ..cfg
        };
        let before = g.clone();
        g.mutate_weights(&cfg, &mut rng(5));
        assert_eq!(g, before);
    }

    #[test]
    fn perturbation_stdev_matches_power() {
        let cfg = NeatConfig {
            weight_replace_rate: 0.0,
            weight_mutate_rate: 1.0,
            weight_max_value: 1e9,
            weight_min_value: -1e9,
            enabled_mutate_rate: 0.0,
            ..NeatConfig::default()
        };
        let mut g = bare(1, 0, 1, &[(0, 1, 0.0)]);
        let mut r = rng(11);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            g.connections[0].weight = 0.0;
            g.mutate_weights(&cfg, &mut r);
            let d = g.connections[0].weight;
            s += d;
            s2 += d * d;
        }
        let mean = s / n as f64;
        let sd = (s2 / n as f64 - mean * mean).sqrt();
        assert!((sd - 3.0).abs() < 0.05, "sd = {sd}");
    }

    #[test]
    fn add_node_splits_with_unit_in_weight() {
        let mut g = bare(1, 0, 1, &[(0, 1, 2.5)]);
        let cfg = NeatConfig::default();
        let mut reg = InnovationRegistry::new(&NeatConfig { num_inputs: 1, num_outputs: 1, num_hidden: 0, ..cfg.clone() });
        reg.connection_innovation(NodeId(0), NodeId(1));
        let n = g.mutate_add_node(&cfg, &mut reg, &mut rng(0)).unwrap();
        let old = g.connection(Innovation(0)).unwrap();
        assert!(!old.enabled);
        let into = g.connections.iter().find(|c| c.out_node == n).unwrap();
        let out = g.connections.iter().find(|c| c.in_node == n).unwrap();
        assert_eq!((into.in_node, into.weight, into.enabled), (NodeId(0), 1.0, true));
        assert_eq!((out.out_node, out.weight, out.enabled), (NodeId(1), 2.5, true));
    }

    #[test]
    fn same_split_same_generation_same_innovations() {
        let (a, mut reg, cfg) = snake_genome(1);
        let mut b = Genome::new_initial(1, &cfg, &mut reg, &mut rng(2));
        let mut a = a;
        // Force both to split the same connection by disabling all others.
        for g in [&mut a, &mut b] {
            for c in g.connections.iter_mut().skip(1) {
                c.enabled = false;
            }
        }
        let na = a.mutate_add_node(&cfg, &mut reg, &mut rng(7)).unwrap();
        let nb = b.mutate_add_node(&cfg, &mut reg, &mut rng(8)).unwrap();
        assert_eq!(na, nb);
        let innovs = |g: &Genome| -> BTreeSet<Innovation> {
            g.connections.iter().filter(|c| c.in_node == na || c.out_node == na).map(|c| c.innovation).collect()
        };
        assert_eq!(innovs(&a), innovs(&b));
    }

    #[test]
    fn add_node_on_empty_is_noop() {
        let mut g = bare(1, 0, 1, &[]);
        let cfg = NeatConfig::default();
        let mut reg = InnovationRegistry::new(&cfg);
        assert!(g.mutate_add_node(&cfg, &mut reg, &mut rng(0)).is_none());
    }

    #[test]
    fn add_connection_saturated_is_noop() {
        // 1 input, 1 hidden, 1 output fully wired: nothing left to add.
        let mut g = bare(1, 1, 1, &[(0, 2, 1.0), (2, 1, 1.0), (0, 1, 1.0)]);
        let cfg = NeatConfig::default();
        let mut reg = InnovationRegistry::new(&cfg);
        let before = g.clone();
        assert!(g.mutate_add_connection(&cfg, &mut reg, &mut rng(0)).is_none());
        assert_eq!(g, before);
    }

    #[test]
    fn add_connection_legal_pairs_by_enumeration() {
        // nodes: 0 input, 1 output, 2 hidden; only input→hidden present.
        let g = bare(1, 1, 1, &[(0, 2, 1.0)]);
        let ids = [NodeId(0), NodeId(1), NodeId(2)];
        let mut legal = BTreeSet::new();
        for &a in &ids {
            for &b in &ids {
                if g.is_legal_new_connection(a, b) {
                    legal.insert((a.0, b.0));
                }
            }
        }
        assert_eq!(legal, BTreeSet::from([(2, 1), (0, 1)]));

        let cfg = NeatConfig::default();
        let mut seen = BTreeSet::new();
        for s in 0..50 {
            let mut h = g.clone();
            let mut reg = InnovationRegistry::new(&cfg);
            assert_eq!(reg.connection_innovation(NodeId(0), NodeId(2)), Innovation(0));
            h.mutate_add_connection(&cfg, &mut reg, &mut rng(s));
            let added: Vec<_> = h.connections.iter().skip(1).map(|c| (c.in_node.0, c.out_node.0)).collect();
            assert!(added.len() <= 1);
            seen.extend(added);
        }
        assert_eq!(seen, legal);
    }

    #[test]
    fn cycle_candidates_are_rejected() {
        // 0 → 2 → 3 → 1 ; adding 3 → 2 or 3 → 3 would cycle.
        let g = bare(1, 2, 1, &[(0, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)]);
        assert!(!g.is_legal_new_connection(NodeId(3), NodeId(2)));
        assert!(!g.is_legal_new_connection(NodeId(3), NodeId(3)));
        assert!(g.is_legal_new_connection(NodeId(0), NodeId(3)));
    }

    #[test]
    fn delete_node_keeps_referential_integrity() {
        let (mut g, _, _) = snake_genome(2);
        let mut r = rng(3);
        let victim = g.delete_node(&mut r).unwrap();
        assert!(!g.has_node(victim));
        assert!(g.connections.iter().all(|c| c.in_node != victim && c.out_node != victim));
    }

    #[test]
    fn deletion_fixpoint_keeps_io_nodes() {
        let (mut g, _, _) = snake_genome(5);
        let mut r = rng(6);
        while g.delete_node(&mut r).is_some() {}
        while g.delete_connection(&mut r).is_some() {}
        assert_eq!(g.nodes.len(), 122);
        assert!(g.connections.is_empty());
        let no_hidden = bare(2, 0, 1, &[]);
        let mut h = no_hidden.clone();
        assert!(h.delete_node(&mut r).is_none());
        assert_eq!(h, no_hidden);
    }

    fn with_innovations(innovs: &[u64], w: f64) -> Genome {
        let mut g = bare(1, 0, 1, &[]);
        for &i in innovs {
            g.connections.push(ConnectionGene {
                innovation: Innovation(i),
                in_node: NodeId(0),
                out_node: NodeId(1),
                weight: w,
                enabled: true,
            });
        }
        g
    }

    #[test]
    fn partition_example() {
        let a = with_innovations(&[1, 2, 3, 5], 1.0);
        let b = with_innovations(&[1, 2, 4], 0.5);
        let p = partition(&a, &b);
        assert_eq!(p.matching, vec![Innovation(1), Innovation(2)]);
        assert_eq!(p.disjoint, vec![Innovation(3), Innovation(4)]);
        assert_eq!(p.excess, vec![Innovation(5)]);
        assert_eq!(p.mean_weight_diff, 0.5);
        let child = crossover(&a, &b, 9, &mut rng(0));
        let set: Vec<u64> = child.connections.iter().map(|c| c.innovation.0).collect();
        assert_eq!(set, vec![1, 2, 3, 5]);
    }

    #[test]
    fn self_crossover_is_identity() {
        let (g, _, _) = snake_genome(8);
        let child = crossover(&g, &g, g.key, &mut rng(1));
        assert_eq!(child.nodes, g.nodes);
        assert_eq!(child.connections, g.connections);
    }

    #[test]
    fn child_weights_come_from_parents() {
        let (a, mut reg, cfg) = snake_genome(1);
        let b = Genome::new_initial(1, &cfg, &mut reg, &mut rng(2));
        let child = crossover(&a, &b, 2, &mut rng(3));
        for c in &child.connections {
            let wa = a.connection(c.innovation).map(|x| x.weight);
            let wb = b.connection(c.innovation).map(|x| x.weight);
            assert!(Some(c.weight) == wa || Some(c.weight) == wb);
        }
    }

    #[test]
    fn disabled_genes_mostly_stay_disabled() {
        let mut a = with_innovations(&[1], 1.0);
        a.connections[0].enabled = false;
        let b = with_innovations(&[1], 1.0);
        let mut r = rng(4);
        let trials = 20_000;
        let disabled = (0..trials)
            .filter(|_| !crossover(&a, &b, 0, &mut r).connections[0].enabled)
            .count();
        let frac = disabled as f64 / trials as f64;
        assert!((frac - 0.75).abs() < 0.015, "{frac}");
    }
}

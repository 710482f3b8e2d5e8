//! Infrastructure network: capacitated directed graph with loopback links.
//!
//! Nodes carry a (compute, memory, wireless) capacity vector, a per-unit cost
//! vector and a fixed usage cost. Every node owns exactly one loopback link
//! used when two VNFs of the same slice are co-located.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node resource types, in the fixed (compute, memory, wireless) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceType {
    Compute,
    Memory,
    Wireless,
}

impl ResourceType {
    pub const ALL: [ResourceType; 3] = [ResourceType::Compute, ResourceType::Memory, ResourceType::Wireless];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short(self) -> &'static str {
        match self {
            ResourceType::Compute => "c",
            ResourceType::Memory => "m",
            ResourceType::Wireless => "w",
        }
    }
}

/// Amount of compute (CPUs), memory (GB) and wireless (Gbps) resources.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceVector {
    #[serde(default)]
    pub compute: f64,
    #[serde(default)]
    pub memory: f64,
    #[serde(default)]
    pub wireless: f64,
}

impl ResourceVector {
    pub const ZERO: ResourceVector = ResourceVector { compute: 0.0, memory: 0.0, wireless: 0.0 };

    pub const fn new(compute: f64, memory: f64, wireless: f64) -> Self {
        ResourceVector { compute, memory, wireless }
    }

    pub fn splat(value: f64) -> Self {
        ResourceVector::new(value, value, value)
    }

    pub fn get(&self, kind: ResourceType) -> f64 {
        match kind {
            ResourceType::Compute => self.compute,
            ResourceType::Memory => self.memory,
            ResourceType::Wireless => self.wireless,
        }
    }

    pub fn get_mut(&mut self, kind: ResourceType) -> &mut f64 {
        match kind {
            ResourceType::Compute => &mut self.compute,
            ResourceType::Memory => &mut self.memory,
            ResourceType::Wireless => &mut self.wireless,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.compute, self.memory, self.wireless]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        ResourceVector::new(a[0], a[1], a[2])
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        ResourceVector::new(f(self.compute), f(self.memory), f(self.wireless))
    }

    pub fn scale(self, factor: f64) -> Self {
        self.map(|x| x * factor)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.to_array().iter().all(|x| *x >= 0.0 && x.is_finite())
    }
}

impl std::ops::Add for ResourceVector {
    type Output = ResourceVector;
    fn add(self, rhs: Self) -> Self {
        ResourceVector::new(self.compute + rhs.compute, self.memory + rhs.memory, self.wireless + rhs.wireless)
    }
}

impl std::ops::AddAssign for ResourceVector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Position of a node in the four-layer tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Central,
    Regional,
    Edge,
    Rrh,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::Central, Layer::Regional, Layer::Edge, Layer::Rrh];

    fn prefix(self) -> &'static str {
        match self {
            Layer::Central => "central",
            Layer::Regional => "regional",
            Layer::Edge => "edge",
            Layer::Rrh => "rrh",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.prefix())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfraNode {
    pub id: String,
    pub layer: Layer,
    pub capacity: ResourceVector,
    pub unit_cost: ResourceVector,
    pub fixed_cost: f64,
}

/// Directed link between two node indices; `src == dst` is a loopback.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfraLink {
    pub src: usize,
    pub dst: usize,
    pub bandwidth: f64,
    pub unit_cost: f64,
}

impl InfraLink {
    pub fn is_loopback(&self) -> bool {
        self.src == self.dst
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureGraph {
    pub nodes: Vec<InfraNode>,
    pub links: Vec<InfraLink>,
}

/// A broken graph invariant reported by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnknownEndpoint { link: usize, node: usize },
    DuplicateLink { src: usize, dst: usize },
    LoopbackCount { node: usize, count: usize },
    NegativeValue { what: String },
    WirelessOffRrh { node: usize },
    DuplicateNodeId { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEndpoint { link, node } => write!(f, "link {link} references unknown node {node}"),
            Violation::DuplicateLink { src, dst } => write!(f, "duplicate link {src}->{dst}"),
            Violation::LoopbackCount { node, count } => write!(f, "node {node} has {count} loopback links, expected 1"),
            Violation::NegativeValue { what } => write!(f, "negative or non-finite value in {what}"),
            Violation::WirelessOffRrh { node } => write!(f, "node {node} has wireless capacity but is not an RRH"),
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id}"),
        }
    }
}

impl InfrastructureGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn link_index(&self, src: usize, dst: usize) -> Option<usize> {
        self.links.iter().position(|l| l.src == src && l.dst == dst)
    }

    pub fn loopback(&self, node: usize) -> Option<usize> {
        self.link_index(node, node)
    }

    /// Human-readable label `src->dst` for a link.
    pub fn link_label(&self, link: usize) -> String {
        let l = &self.links[link];
        format!("{}->{}", self.nodes[l.src].id, self.nodes[l.dst].id)
    }
}

/// Checks every structural invariant; an empty result means the graph is well formed.
pub fn validate(graph: &InfrastructureGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = graph.nodes.len();

    let mut ids = std::collections::BTreeSet::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        if !ids.insert(node.id.as_str()) {
            out.push(Violation::DuplicateNodeId { id: node.id.clone() });
        }
        if !node.capacity.is_nonnegative() || !node.unit_cost.is_nonnegative() || !(node.fixed_cost >= 0.0) {
            out.push(Violation::NegativeValue { what: format!("node {}", node.id) });
        }
        if node.capacity.wireless > 0.0 && node.layer != Layer::Rrh {
            out.push(Violation::WirelessOffRrh { node: i });
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    let mut loopbacks = vec![0usize; n];
    for (e, link) in graph.links.iter().enumerate() {
        let mut dangling = false;
        for end in [link.src, link.dst] {
            if end >= n {
                out.push(Violation::UnknownEndpoint { link: e, node: end });
                dangling = true;
            }
        }
        if !(link.bandwidth >= 0.0 && link.unit_cost >= 0.0 && link.bandwidth.is_finite()) {
            out.push(Violation::NegativeValue { what: format!("link {e}") });
        }
        if !seen.insert((link.src, link.dst)) {
            out.push(Violation::DuplicateLink { src: link.src, dst: link.dst });
        }
        if !dangling && link.is_loopback() {
            loopbacks[link.src] += 1;
        }
    }
    for (node, &count) in loopbacks.iter().enumerate() {
        if count != 1 {
            out.push(Violation::LoopbackCount { node, count });
        }
    }
    out
}

/// Bandwidth of each tier of tree links, in Gbps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierBandwidth {
    pub central_regional: f64,
    pub regional_edge: f64,
    pub edge_rrh: f64,
    /// Loopback bandwidth; defaults to the node's uplink bandwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loopback: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCosts {
    pub node: ResourceVector,
    pub link: f64,
    pub loopback: f64,
}

impl Default for UnitCosts {
    fn default() -> Self {
        UnitCosts { node: ResourceVector::splat(1.0), link: 1.0, loopback: 1.0 }
    }
}

/// Parameters of a four-layer k-ary tree (central, regional, edge, RRH).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatTreeConfig {
    pub k: usize,
    pub capacity: BTreeMap<Layer, ResourceVector>,
    #[serde(default = "default_fixed_costs")]
    pub fixed_cost: BTreeMap<Layer, f64>,
    pub bandwidth: TierBandwidth,
    #[serde(default)]
    pub unit_cost: UnitCosts,
}

pub fn default_fixed_costs() -> BTreeMap<Layer, f64> {
    Layer::ALL.into_iter().zip([65.0, 60.0, 55.0, 50.0]).collect()
}

impl Default for FatTreeConfig {
    /// The desk-scale k = 2 infrastructure. Capacities are invented defaults: the
    /// radio layer is kept small so that a single HD-video slice spreads over a
    /// handful of RRHs, and a background reserve visibly changes the placement.
    fn default() -> Self {
        let capacity = [
            (Layer::Central, ResourceVector::new(64.0, 128.0, 0.0)),
            (Layer::Regional, ResourceVector::new(32.0, 64.0, 0.0)),
            (Layer::Edge, ResourceVector::new(16.0, 32.0, 0.0)),
            (Layer::Rrh, ResourceVector::new(1.0, 2.0, 1.0)),
        ]
        .into_iter()
        .collect();
        FatTreeConfig {
            k: 2,
            capacity,
            fixed_cost: default_fixed_costs(),
            bandwidth: TierBandwidth { central_regional: 40.0, regional_edge: 20.0, edge_rrh: 10.0, loopback: None },
            unit_cost: UnitCosts::default(),
        }
    }
}

/// Builds the four-layer tree with branching factor `k` at every layer.
///
/// Links come as (down, up) pairs in breadth-first order of the child node,
/// followed by one loopback per node in node order.
pub fn build_fat_tree(cfg: &FatTreeConfig) -> Result<InfrastructureGraph> {
    if cfg.k < 2 {
        return Err(Error::Topology(format!("branching factor k must be >= 2, got {}", cfg.k)));
    }
    for layer in Layer::ALL {
        let cap = cfg.capacity.get(&layer).ok_or_else(|| Error::Topology(format!("missing capacity for layer {layer}")))?;
        if !cap.is_nonnegative() {
            return Err(Error::Topology(format!("negative capacity for layer {layer}")));
        }
        let fixed = cfg.fixed_cost.get(&layer).ok_or_else(|| Error::Topology(format!("missing fixed cost for layer {layer}")))?;
        if !(*fixed >= 0.0) {
            return Err(Error::Topology(format!("negative fixed cost for layer {layer}")));
        }
    }
    let bw = &cfg.bandwidth;
    let tiers = [bw.central_regional, bw.regional_edge, bw.edge_rrh];
    if tiers.iter().chain(bw.loopback.iter()).any(|b| !(*b >= 0.0)) {
        return Err(Error::Topology("negative link bandwidth".into()));
    }
    if !cfg.unit_cost.node.is_nonnegative() || !(cfg.unit_cost.link >= 0.0) || !(cfg.unit_cost.loopback >= 0.0) {
        return Err(Error::Topology("negative unit cost".into()));
    }

    let mut graph = InfrastructureGraph::default();
    // (node index, uplink bandwidth) per layer
    let mut uplink = Vec::new();
    let mut frontier = Vec::new();
    let push_node = |graph: &mut InfrastructureGraph, layer: Layer, ordinal: usize| {
        let mut capacity = cfg.capacity[&layer];
        if layer != Layer::Rrh {
            capacity.wireless = 0.0;
        }
        graph.nodes.push(InfraNode {
            id: format!("{}{}", layer.prefix(), ordinal),
            layer,
            capacity,
            unit_cost: cfg.unit_cost.node,
            fixed_cost: cfg.fixed_cost[&layer],
        });
        graph.nodes.len() - 1
    };

    let root = push_node(&mut graph, Layer::Central, 0);
    uplink.push(bw.central_regional);
    frontier.push(root);
    for (depth, layer) in [Layer::Regional, Layer::Edge, Layer::Rrh].into_iter().enumerate() {
        let mut next = Vec::with_capacity(frontier.len() * cfg.k);
        for &parent in &frontier {
            for _ in 0..cfg.k {
                let child = push_node(&mut graph, layer, next.len());
                uplink.push(tiers[depth]);
                for (src, dst) in [(parent, child), (child, parent)] {
                    graph.links.push(InfraLink { src, dst, bandwidth: tiers[depth], unit_cost: cfg.unit_cost.link });
                }
                next.push(child);
            }
        }
        frontier = next;
    }
    for (node, up) in uplink.into_iter().enumerate() {
        graph.links.push(InfraLink { src: node, dst: node, bandwidth: bw.loopback.unwrap_or(up), unit_cost: cfg.unit_cost.loopback });
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize) -> FatTreeConfig {
        FatTreeConfig { k, ..FatTreeConfig::default() }
    }

    #[test]
    fn binary_tree_counts() {
        let g = build_fat_tree(&cfg(2)).unwrap();
        assert_eq!(g.node_count(), 15);
        assert_eq!(g.links.iter().filter(|l| !l.is_loopback()).count(), 28);
        assert_eq!(g.link_count(), 43);
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn node_counts_follow_k() {
        for k in 2..=4 {
            let g = build_fat_tree(&cfg(k)).unwrap();
            assert_eq!(g.node_count(), 1 + k + k * k + k * k * k);
            assert_eq!(g.link_count(), 2 * (k + k * k + k * k * k) + g.node_count());
        }
    }

    #[test]
    fn costs_match_layer_constants() {
        let g = build_fat_tree(&cfg(2)).unwrap();
        for node in &g.nodes {
            let expected = match node.layer {
                Layer::Central => 65.0,
                Layer::Regional => 60.0,
                Layer::Edge => 55.0,
                Layer::Rrh => 50.0,
            };
            assert_eq!(node.fixed_cost, expected);
            assert_eq!(node.unit_cost, ResourceVector::splat(1.0));
            if node.layer != Layer::Rrh {
                assert_eq!(node.capacity.wireless, 0.0);
            }
        }
        assert!(g.links.iter().all(|l| l.unit_cost == 1.0));
    }

    #[test]
    fn rejects_small_k() {
        assert!(matches!(build_fat_tree(&cfg(1)), Err(Error::Topology(_))));
        assert!(build_fat_tree(&cfg(0)).is_err());
    }

    #[test]
    fn missing_layer_is_an_error() {
        let mut c = cfg(2);
        c.capacity.remove(&Layer::Edge);
        assert!(build_fat_tree(&c).is_err());
    }

    #[test]
    fn validate_reports_bad_links() {
        let mut g = build_fat_tree(&cfg(2)).unwrap();
        g.links.push(InfraLink { src: 0, dst: 99, bandwidth: 1.0, unit_cost: 1.0 });
        let v = validate(&g);
        assert_eq!(v, vec![Violation::UnknownEndpoint { link: 43, node: 99 }]);

        let mut g = build_fat_tree(&cfg(2)).unwrap();
        let lb = g.loopback(3).unwrap();
        g.links.remove(lb);
        assert_eq!(validate(&g), vec![Violation::LoopbackCount { node: 3, count: 0 }]);
    }

    #[test]
    fn deterministic_serialization() {
        let a = toml::to_string(&build_fat_tree(&cfg(2)).unwrap()).unwrap();
        let b = toml::to_string(&build_fat_tree(&cfg(2)).unwrap()).unwrap();
        assert_eq!(a, b);
        let back: InfrastructureGraph = toml::from_str(&a).unwrap();
        assert_eq!(back, build_fat_tree(&cfg(2)).unwrap());
    }
}

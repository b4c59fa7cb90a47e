//! Instance data model: substrate and request graphs, the five-flag variant
//! taxonomy, and mappings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{Quantity, Rational};

/// Identifier of a node in either graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Directed edge `(tail, head)`.
pub type Edge = (NodeId, NodeId);

pub fn edge(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Edge {
    (from.into(), to.into())
}

pub(crate) fn show_edge(e: &Edge) -> String {
    format!("({}, {})", e.0, e.1)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("duplicate edge {}", show_edge(.0))]
    DuplicateEdge(Edge),
    #[error("self-loop on `{0}`")]
    SelfLoop(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("unknown edge {}", show_edge(.0))]
    UnknownEdge(Edge),
    #[error("negative {what} on `{element}`")]
    Negative { what: &'static str, element: String },
    #[error("request node `{0}` has no image in the mapping")]
    UnmappedNode(NodeId),
    #[error("request edge {} has no path in the mapping", show_edge(.0))]
    UnmappedEdge(Edge),
    #[error("approximation factor {name} = {value} is below 1")]
    FactorBelowOne { name: &'static str, value: Rational },
    #[error("target variant {target} enforces constraints that {source_variant} does not")]
    NotARelaxation {
        source_variant: VariantSpec,
        target: VariantSpec,
    },
    #[error("mapping is not valid: {0}")]
    InvalidMapping(crate::validate::Report),
}

/// Physical network: simple directed graph with capacities and latencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubstrateGraph {
    pub(crate) nodes: BTreeMap<NodeId, Quantity>,
    pub(crate) edges: BTreeMap<Edge, SubstrateEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateEdge {
    pub capacity: Quantity,
    pub latency: Rational,
}

impl SubstrateGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        id: impl Into<NodeId>,
        capacity: impl Into<Quantity>,
    ) -> Result<(), ModelError> {
        let id = id.into();
        let capacity = capacity.into();
        if capacity.is_negative() {
            return Err(ModelError::Negative {
                what: "capacity",
                element: id.to_string(),
            });
        }
        if self.nodes.contains_key(&id) {
            return Err(ModelError::DuplicateNode(id));
        }
        self.nodes.insert(id, capacity);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        from: impl Into<NodeId>,
        to: impl Into<NodeId>,
        capacity: impl Into<Quantity>,
        latency: Rational,
    ) -> Result<(), ModelError> {
        let e = edge(from, to);
        check_edge_shape(&e, |n| self.nodes.contains_key(n), self.edges.contains_key(&e))?;
        let capacity = capacity.into();
        if capacity.is_negative() {
            return Err(ModelError::Negative {
                what: "capacity",
                element: show_edge(&e),
            });
        }
        if latency.is_negative() {
            return Err(ModelError::Negative {
                what: "latency",
                element: show_edge(&e),
            });
        }
        self.edges.insert(e, SubstrateEdge { capacity, latency });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.keys()
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.contains_key(e)
    }

    pub fn node_capacity(&self, id: &NodeId) -> Option<Quantity> {
        self.nodes.get(id).copied()
    }

    pub fn edge(&self, e: &Edge) -> Option<&SubstrateEdge> {
        self.edges.get(e)
    }

    pub fn edge_capacity(&self, e: &Edge) -> Option<Quantity> {
        self.edges.get(e).map(|d| d.capacity)
    }

    pub fn edge_latency(&self, e: &Edge) -> Option<Rational> {
        self.edges.get(e).map(|d| d.latency)
    }

    pub fn set_node_capacity(&mut self, id: &NodeId, capacity: Quantity) -> Result<(), ModelError> {
        match self.nodes.get_mut(id) {
            Some(c) => {
                *c = capacity;
                Ok(())
            }
            None => Err(ModelError::UnknownNode(id.clone())),
        }
    }

    pub fn set_edge_capacity(&mut self, e: &Edge, capacity: Quantity) -> Result<(), ModelError> {
        match self.edges.get_mut(e) {
            Some(d) => {
                d.capacity = capacity;
                Ok(())
            }
            None => Err(ModelError::UnknownEdge(e.clone())),
        }
    }

    pub fn set_edge_latency(&mut self, e: &Edge, latency: Rational) -> Result<(), ModelError> {
        match self.edges.get_mut(e) {
            Some(d) => {
                d.latency = latency;
                Ok(())
            }
            None => Err(ModelError::UnknownEdge(e.clone())),
        }
    }

    /// Outgoing edges of `u` in lexicographic order of the head.
    pub fn out_edges<'a>(&'a self, u: &'a NodeId) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.keys().filter(move |(a, _)| a == u)
    }
}

fn check_edge_shape(
    e: &Edge,
    has_node: impl Fn(&NodeId) -> bool,
    duplicate: bool,
) -> Result<(), ModelError> {
    if e.0 == e.1 {
        return Err(ModelError::SelfLoop(e.0.clone()));
    }
    for end in [&e.0, &e.1] {
        if !has_node(end) {
            return Err(ModelError::UnknownNode(end.clone()));
        }
    }
    if duplicate {
        return Err(ModelError::DuplicateEdge(e.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RequestNode {
    pub demand: Rational,
    pub forbidden: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestEdge {
    pub demand: Rational,
    pub latency_bound: Quantity,
    pub forbidden: BTreeSet<Edge>,
}

/// Virtual network: simple directed graph with demands, latency bounds and
/// forbidden placement/routing sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestGraph {
    pub(crate) nodes: BTreeMap<NodeId, RequestNode>,
    pub(crate) edges: BTreeMap<Edge, RequestEdge>,
}

impl RequestGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<NodeId>, demand: Rational) -> Result<(), ModelError> {
        let id = id.into();
        if demand.is_negative() {
            return Err(ModelError::Negative {
                what: "demand",
                element: id.to_string(),
            });
        }
        if self.nodes.contains_key(&id) {
            return Err(ModelError::DuplicateNode(id));
        }
        self.nodes.insert(
            id,
            RequestNode {
                demand,
                forbidden: BTreeSet::new(),
            },
        );
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        from: impl Into<NodeId>,
        to: impl Into<NodeId>,
        demand: Rational,
        latency_bound: impl Into<Quantity>,
    ) -> Result<(), ModelError> {
        let e = edge(from, to);
        check_edge_shape(&e, |n| self.nodes.contains_key(n), self.edges.contains_key(&e))?;
        let latency_bound = latency_bound.into();
        if demand.is_negative() {
            return Err(ModelError::Negative {
                what: "demand",
                element: show_edge(&e),
            });
        }
        if latency_bound.is_negative() {
            return Err(ModelError::Negative {
                what: "latency bound",
                element: show_edge(&e),
            });
        }
        self.edges.insert(
            e,
            RequestEdge {
                demand,
                latency_bound,
                forbidden: BTreeSet::new(),
            },
        );
        Ok(())
    }

    pub fn forbid_node(&mut self, i: &NodeId, host: impl Into<NodeId>) -> Result<(), ModelError> {
        let node = self
            .nodes
            .get_mut(i)
            .ok_or_else(|| ModelError::UnknownNode(i.clone()))?;
        node.forbidden.insert(host.into());
        Ok(())
    }

    pub fn forbid_edge(&mut self, ij: &Edge, se: Edge) -> Result<(), ModelError> {
        let e = self
            .edges
            .get_mut(ij)
            .ok_or_else(|| ModelError::UnknownEdge(ij.clone()))?;
        e.forbidden.insert(se);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.keys()
    }

    pub fn node(&self, id: &NodeId) -> Option<&RequestNode> {
        self.nodes.get(id)
    }

    pub fn edge(&self, e: &Edge) -> Option<&RequestEdge> {
        self.edges.get(e)
    }

    pub fn node_mut(&mut self, id: &NodeId) -> Option<&mut RequestNode> {
        self.nodes.get_mut(id)
    }

    pub fn edge_mut(&mut self, e: &Edge) -> Option<&mut RequestEdge> {
        self.edges.get_mut(e)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }
}

/// Which constraint families are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VariantSpec {
    pub node_capacities: bool,
    pub edge_capacities: bool,
    pub node_placement: bool,
    pub routing: bool,
    pub latency: bool,
}

impl VariantSpec {
    /// Node and edge capacities, no further restrictions.
    pub const VE_NONE: VariantSpec = VariantSpec::new(true, true, false, false, false);
    /// Edge capacities with node placement restrictions.
    pub const E_N: VariantSpec = VariantSpec::new(false, true, true, false, false);
    /// Node capacities with routing restrictions.
    pub const V_R: VariantSpec = VariantSpec::new(true, false, false, true, false);
    /// No capacities; node placement and routing restrictions.
    pub const NONE_NR: VariantSpec = VariantSpec::new(false, false, true, true, false);
    /// No capacities; node placement and latency restrictions.
    pub const NONE_NL: VariantSpec = VariantSpec::new(false, false, true, false, true);
    /// Nothing enforced beyond validity of the mapping shape.
    pub const NONE: VariantSpec = VariantSpec::new(false, false, false, false, false);
    /// Everything enforced.
    pub const ALL: VariantSpec = VariantSpec::new(true, true, true, true, true);

    pub const fn new(
        node_capacities: bool,
        edge_capacities: bool,
        node_placement: bool,
        routing: bool,
        latency: bool,
    ) -> Self {
        VariantSpec {
            node_capacities,
            edge_capacities,
            node_placement,
            routing,
            latency,
        }
    }

    fn flags(&self) -> [bool; 5] {
        [
            self.node_capacities,
            self.edge_capacities,
            self.node_placement,
            self.routing,
            self.latency,
        ]
    }

    /// True when every flag of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &VariantSpec) -> bool {
        self.flags()
            .iter()
            .zip(other.flags().iter())
            .all(|(a, b)| !a || *b)
    }
}

impl fmt::Display for VariantSpec {
    /// Renders the `C|A` notation, e.g. `VE|-` or `-|NL`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut caps = String::new();
        if self.node_capacities {
            caps.push('V');
        }
        if self.edge_capacities {
            caps.push('E');
        }
        if caps.is_empty() {
            caps.push('-');
        }
        let mut extra = String::new();
        if self.node_placement {
            extra.push('N');
        }
        if self.routing {
            extra.push('R');
        }
        if self.latency {
            extra.push('L');
        }
        if extra.is_empty() {
            extra.push('-');
        }
        write!(f, "{caps}|{extra}")
    }
}

/// A substrate/request pair under a variant.
///
/// Construction normalizes the instance: capacities of disabled capacity
/// families become infinite, latency bounds become infinite without the
/// latency flag, and forbidden sets are emptied without the corresponding
/// restriction flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnepInstance {
    substrate: SubstrateGraph,
    request: RequestGraph,
    variant: VariantSpec,
}

impl VnepInstance {
    pub fn new(
        mut substrate: SubstrateGraph,
        mut request: RequestGraph,
        variant: VariantSpec,
    ) -> Result<Self, ModelError> {
        for node in request.nodes.values() {
            for host in &node.forbidden {
                if !substrate.contains_node(host) {
                    return Err(ModelError::UnknownNode(host.clone()));
                }
            }
        }
        for e in request.edges.values() {
            for se in &e.forbidden {
                if !substrate.contains_edge(se) {
                    return Err(ModelError::UnknownEdge(se.clone()));
                }
            }
        }
        if !variant.node_capacities {
            substrate.nodes.values_mut().for_each(|c| *c = Quantity::Infinite);
        }
        if !variant.edge_capacities {
            substrate
                .edges
                .values_mut()
                .for_each(|e| e.capacity = Quantity::Infinite);
        }
        if !variant.latency {
            request
                .edges
                .values_mut()
                .for_each(|e| e.latency_bound = Quantity::Infinite);
        }
        if !variant.node_placement {
            request.nodes.values_mut().for_each(|n| n.forbidden.clear());
        }
        if !variant.routing {
            request.edges.values_mut().for_each(|e| e.forbidden.clear());
        }
        Ok(VnepInstance {
            substrate,
            request,
            variant,
        })
    }

    pub fn substrate(&self) -> &SubstrateGraph {
        &self.substrate
    }

    pub fn request(&self) -> &RequestGraph {
        &self.request
    }

    pub fn variant(&self) -> VariantSpec {
        self.variant
    }

    pub fn into_parts(self) -> (SubstrateGraph, RequestGraph, VariantSpec) {
        (self.substrate, self.request, self.variant)
    }
}

/// Node map plus one substrate path (list of edges) per request edge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mapping {
    pub node_map: BTreeMap<NodeId, NodeId>,
    pub edge_map: BTreeMap<Edge, Vec<Edge>>,
}

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn map_node(&mut self, i: impl Into<NodeId>, u: impl Into<NodeId>) -> &mut Self {
        self.node_map.insert(i.into(), u.into());
        self
    }

    pub fn map_edge(&mut self, ij: Edge, path: Vec<Edge>) -> &mut Self {
        self.edge_map.insert(ij, path);
        self
    }

    /// Convenience: path given as a node sequence `[u, w, ..., v]`.
    pub fn map_edge_nodes(&mut self, ij: Edge, nodes: &[&str]) -> &mut Self {
        let path = nodes
            .windows(2)
            .map(|w| edge(w[0], w[1]))
            .collect::<Vec<_>>();
        self.edge_map.insert(ij, path);
        self
    }
}

/// Cumulative resource usage of a mapping. Every substrate element is listed,
/// unused ones with zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocations {
    pub node_alloc: BTreeMap<NodeId, Rational>,
    pub edge_alloc: BTreeMap<Edge, Rational>,
}

impl Allocations {
    pub fn zeroed(substrate: &SubstrateGraph) -> Self {
        Allocations {
            node_alloc: substrate
                .nodes()
                .map(|u| (u.clone(), Rational::zero()))
                .collect(),
            edge_alloc: substrate
                .edges()
                .map(|e| (e.clone(), Rational::zero()))
                .collect(),
        }
    }

    pub fn node(&self, u: &NodeId) -> Rational {
        self.node_alloc.get(u).copied().unwrap_or_else(Rational::zero)
    }

    pub fn edge(&self, e: &Edge) -> Rational {
        self.edge_alloc.get(e).copied().unwrap_or_else(Rational::zero)
    }
}

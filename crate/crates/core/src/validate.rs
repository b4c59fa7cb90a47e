//! Validity, feasibility and approximate-feasibility checks, plus the
//! constraint-disabling relaxation between variants.
//!
//! All checks are pure and collect every violation rather than stopping at
//! the first. Structural problems (ids that do not exist in the instance, a
//! mapping that is not total) are reported as [`ModelError`]s, distinct from
//! an invalid mapping.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::model::{show_edge, Allocations, Edge, Mapping, ModelError, NodeId, VnepInstance};
use crate::model::{VariantSpec};
use crate::rational::{serde_rational, Quantity, Rational};

/// Scaling factors of an approximate embedding. All are at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ApproxFactors {
    #[serde(with = "serde_rational")]
    alpha: Rational,
    #[serde(with = "serde_rational")]
    beta: Rational,
    #[serde(with = "serde_rational")]
    gamma: Rational,
}

impl ApproxFactors {
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational) -> Result<Self, ModelError> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if value < Rational::one() {
                return Err(ModelError::FactorBelowOne { name, value });
            }
        }
        Ok(ApproxFactors { alpha, beta, gamma })
    }

    pub fn exact() -> Self {
        ApproxFactors {
            alpha: Rational::one(),
            beta: Rational::one(),
            gamma: Rational::one(),
        }
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    pub fn beta(&self) -> Rational {
        self.beta
    }

    pub fn gamma(&self) -> Rational {
        self.gamma
    }

    pub fn is_exact(&self) -> bool {
        *self == Self::exact()
    }
}

impl Default for ApproxFactors {
    fn default() -> Self {
        Self::exact()
    }
}

/// One violated condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The host is forbidden or lacks the capacity for the node's demand.
    NodeNotAllowed { node: NodeId, host: NodeId },
    /// Consecutive path edges do not share an endpoint.
    PathBroken { edge: Edge, position: usize },
    /// The path does not start at the tail's host or end at the head's host.
    PathEndpoints { edge: Edge },
    /// The path revisits a substrate node.
    PathNotSimple { edge: Edge, node: NodeId },
    /// Endpoints are collocated but the path is not empty.
    CollocatedWithPath { edge: Edge },
    /// Endpoints are on different hosts but the path is empty.
    MissingPath { edge: Edge },
    /// A path edge is forbidden or lacks the capacity for the edge's demand.
    EdgeNotAllowed { edge: Edge, substrate_edge: Edge },
    NodeOverCapacity {
        node: NodeId,
        #[serde(with = "serde_rational")]
        allocation: Rational,
        limit: Quantity,
    },
    EdgeOverCapacity {
        substrate_edge: Edge,
        #[serde(with = "serde_rational")]
        allocation: Rational,
        limit: Quantity,
    },
    LatencyExceeded {
        edge: Edge,
        #[serde(with = "serde_rational")]
        latency: Rational,
        limit: Quantity,
    },
}

impl Violation {
    /// True for violations of the validity conditions (as opposed to
    /// cumulative capacity or latency limits).
    pub fn is_validity(&self) -> bool {
        !matches!(
            self,
            Violation::NodeOverCapacity { .. }
                | Violation::EdgeOverCapacity { .. }
                | Violation::LatencyExceeded { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeNotAllowed { node, host } => {
                write!(f, "node {node} may not be placed on {host}")
            }
            Violation::PathBroken { edge, position } => {
                write!(f, "path of {} is broken at hop {position}", show_edge(edge))
            }
            Violation::PathEndpoints { edge } => {
                write!(f, "path of {} does not connect the endpoint hosts", show_edge(edge))
            }
            Violation::PathNotSimple { edge, node } => {
                write!(f, "path of {} revisits {node}", show_edge(edge))
            }
            Violation::CollocatedWithPath { edge } => {
                write!(f, "{} has collocated endpoints but a nonempty path", show_edge(edge))
            }
            Violation::MissingPath { edge } => {
                write!(f, "{} has separated endpoints but an empty path", show_edge(edge))
            }
            Violation::EdgeNotAllowed {
                edge,
                substrate_edge,
            } => write!(
                f,
                "{} may not be routed over {}",
                show_edge(edge),
                show_edge(substrate_edge)
            ),
            Violation::NodeOverCapacity {
                node,
                allocation,
                limit,
            } => write!(f, "node {node} allocated {allocation} > {limit}"),
            Violation::EdgeOverCapacity {
                substrate_edge,
                allocation,
                limit,
            } => write!(
                f,
                "edge {} allocated {allocation} > {limit}",
                show_edge(substrate_edge)
            ),
            Violation::LatencyExceeded {
                edge,
                latency,
                limit,
            } => write!(f, "{} has latency {latency} > {limit}", show_edge(edge)),
        }
    }
}

/// Outcome of a check: empty means the mapping passed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn validity_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_validity())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Substrate nodes that may host request node `i`: not forbidden and with
/// capacity at least the node's demand.
pub fn allowed_nodes(instance: &VnepInstance, i: &NodeId) -> Result<BTreeSet<NodeId>, ModelError> {
    let node = instance
        .request()
        .node(i)
        .ok_or_else(|| ModelError::UnknownNode(i.clone()))?;
    let substrate = instance.substrate();
    Ok(substrate
        .nodes
        .iter()
        .filter(|(u, cap)| !node.forbidden.contains(*u) && cap.admits(node.demand))
        .map(|(u, _)| u.clone())
        .collect())
}

/// Substrate edges that may carry request edge `ij`.
pub fn allowed_edges(instance: &VnepInstance, ij: &Edge) -> Result<BTreeSet<Edge>, ModelError> {
    let redge = instance
        .request()
        .edge(ij)
        .ok_or_else(|| ModelError::UnknownEdge(ij.clone()))?;
    Ok(instance
        .substrate()
        .edges
        .iter()
        .filter(|(e, d)| !redge.forbidden.contains(*e) && d.capacity.admits(redge.demand))
        .map(|(e, _)| e.clone())
        .collect())
}

fn node_allowed(instance: &VnepInstance, i: &NodeId, u: &NodeId) -> bool {
    let node = &instance.request().nodes[i];
    let cap = instance.substrate().nodes[u];
    !node.forbidden.contains(u) && cap.admits(node.demand)
}

fn edge_allowed(instance: &VnepInstance, ij: &Edge, e: &Edge) -> bool {
    let redge = &instance.request().edges[ij];
    let cap = instance.substrate().edges[e].capacity;
    !redge.forbidden.contains(e) && cap.admits(redge.demand)
}

/// Rejects mappings that are not total or mention ids absent from the instance.
fn check_references(instance: &VnepInstance, m: &Mapping) -> Result<(), ModelError> {
    let request = instance.request();
    let substrate = instance.substrate();
    for (i, u) in &m.node_map {
        if !request.contains_node(i) || !substrate.contains_node(u) {
            let missing = if request.contains_node(i) { u } else { i };
            return Err(ModelError::UnknownNode(missing.clone()));
        }
    }
    for (ij, path) in &m.edge_map {
        if request.edge(ij).is_none() {
            return Err(ModelError::UnknownEdge(ij.clone()));
        }
        for e in path {
            if !substrate.contains_edge(e) {
                return Err(ModelError::UnknownEdge(e.clone()));
            }
        }
    }
    for i in request.nodes() {
        if !m.node_map.contains_key(i) {
            return Err(ModelError::UnmappedNode(i.clone()));
        }
    }
    for ij in request.edges() {
        if !m.edge_map.contains_key(ij) {
            return Err(ModelError::UnmappedEdge(ij.clone()));
        }
    }
    Ok(())
}

fn validity_violations(instance: &VnepInstance, m: &Mapping) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, u) in &m.node_map {
        if !node_allowed(instance, i, u) {
            out.push(Violation::NodeNotAllowed {
                node: i.clone(),
                host: u.clone(),
            });
        }
    }
    for (ij, path) in &m.edge_map {
        let src = &m.node_map[&ij.0];
        let dst = &m.node_map[&ij.1];
        if path.is_empty() {
            if src != dst {
                out.push(Violation::MissingPath { edge: ij.clone() });
            }
        } else {
            if src == dst {
                out.push(Violation::CollocatedWithPath { edge: ij.clone() });
            }
            if &path[0].0 != src || &path[path.len() - 1].1 != dst {
                out.push(Violation::PathEndpoints { edge: ij.clone() });
            }
            for (k, pair) in path.windows(2).enumerate() {
                if pair[0].1 != pair[1].0 {
                    out.push(Violation::PathBroken {
                        edge: ij.clone(),
                        position: k + 1,
                    });
                }
            }
            let mut seen: HashSet<&NodeId> = HashSet::new();
            seen.insert(&path[0].0);
            for e in path {
                if !seen.insert(&e.1) {
                    out.push(Violation::PathNotSimple {
                        edge: ij.clone(),
                        node: e.1.clone(),
                    });
                }
            }
        }
        for e in path {
            if !edge_allowed(instance, ij, e) {
                out.push(Violation::EdgeNotAllowed {
                    edge: ij.clone(),
                    substrate_edge: e.clone(),
                });
            }
        }
    }
    out
}

/// Checks the validity conditions: allowed hosts, simple connecting paths,
/// empty paths exactly for collocated endpoints, allowed path edges.
pub fn is_valid(instance: &VnepInstance, m: &Mapping) -> Result<Report, ModelError> {
    check_references(instance, m)?;
    Ok(Report {
        violations: validity_violations(instance, m),
    })
}

fn accumulate(instance: &VnepInstance, m: &Mapping) -> Allocations {
    let mut alloc = Allocations::zeroed(instance.substrate());
    for (i, u) in &m.node_map {
        let d = instance.request().nodes[i].demand;
        *alloc.node_alloc.get_mut(u).expect("checked host") += d;
    }
    for (ij, path) in &m.edge_map {
        let d = instance.request().edges[ij].demand;
        for e in path {
            *alloc.edge_alloc.get_mut(e).expect("checked edge") += d;
        }
    }
    alloc
}

/// Resource allocations induced by a valid mapping.
pub fn allocations(instance: &VnepInstance, m: &Mapping) -> Result<Allocations, ModelError> {
    let report = is_valid(instance, m)?;
    if !report.is_ok() {
        return Err(ModelError::InvalidMapping(report));
    }
    Ok(accumulate(instance, m))
}

fn path_latency(instance: &VnepInstance, path: &[Edge]) -> Rational {
    path.iter()
        .map(|e| instance.substrate().edges[e].latency)
        .fold(Rational::zero(), |a, b| a + b)
}

fn check(instance: &VnepInstance, m: &Mapping, factors: &ApproxFactors) -> Result<Report, ModelError> {
    check_references(instance, m)?;
    let mut violations = validity_violations(instance, m);
    let variant = instance.variant();
    let alloc = accumulate(instance, m);
    if variant.node_capacities {
        for (u, cap) in &instance.substrate().nodes {
            let limit = cap.scaled(factors.alpha);
            let a = alloc.node(u);
            if !limit.admits(a) {
                violations.push(Violation::NodeOverCapacity {
                    node: u.clone(),
                    allocation: a,
                    limit,
                });
            }
        }
    }
    if variant.edge_capacities {
        for (e, d) in &instance.substrate().edges {
            let limit = d.capacity.scaled(factors.beta);
            let a = alloc.edge(e);
            if !limit.admits(a) {
                violations.push(Violation::EdgeOverCapacity {
                    substrate_edge: e.clone(),
                    allocation: a,
                    limit,
                });
            }
        }
    }
    if variant.latency {
        for (ij, path) in &m.edge_map {
            let limit = instance.request().edges[ij].latency_bound.scaled(factors.gamma);
            let latency = path_latency(instance, path);
            if !limit.admits(latency) {
                violations.push(Violation::LatencyExceeded {
                    edge: ij.clone(),
                    latency,
                    limit,
                });
            }
        }
    }
    Ok(Report { violations })
}

/// Valid, within every enforced capacity, and within every latency bound.
pub fn is_feasible(instance: &VnepInstance, m: &Mapping) -> Result<Report, ModelError> {
    check(instance, m, &ApproxFactors::exact())
}

/// Valid (against the original capacities) with cumulative allocations and
/// latencies within the scaled limits.
pub fn is_approx_feasible(
    instance: &VnepInstance,
    m: &Mapping,
    factors: &ApproxFactors,
) -> Result<Report, ModelError> {
    check(instance, m, factors)
}

/// Disables every constraint family absent from `target`: capacities become
/// infinite, forbidden sets empty, substrate latencies zero and latency bounds
/// infinite.
pub fn relax_variant(instance: &VnepInstance, target: VariantSpec) -> Result<VnepInstance, ModelError> {
    let source = instance.variant();
    if !target.is_subset_of(&source) {
        return Err(ModelError::NotARelaxation {
            source_variant: source,
            target,
        });
    }
    let (mut substrate, request, _) = instance.clone().into_parts();
    if !target.latency {
        for e in substrate.edges.values_mut() {
            e.latency = Rational::zero();
        }
    }
    // Remaining neutralization is the constructor's normalization.
    VnepInstance::new(substrate, request, target)
}

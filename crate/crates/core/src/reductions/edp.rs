//! Directed edge-disjoint paths with congestion, embedded as VNEP.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::ReductionError;
use crate::model::{Edge, NodeId, RequestGraph, SubstrateGraph, VariantSpec, VnepInstance};
use crate::rational::{Quantity, Rational};

/// Route every `(source, sink)` pair along a directed path such that no edge
/// carries more than `congestion` paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirEdpwcInstance {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
    commodities: Vec<(NodeId, NodeId)>,
    congestion: u32,
}

impl DirEdpwcInstance {
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = Edge>,
        commodities: Vec<(NodeId, NodeId)>,
        congestion: u32,
    ) -> Result<Self, ReductionError> {
        use crate::model::ModelError;
        if congestion == 0 {
            return Err(ReductionError::Congestion);
        }
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut set = BTreeSet::new();
        for e in edges {
            if e.0 == e.1 {
                return Err(ModelError::SelfLoop(e.0).into());
            }
            for end in [&e.0, &e.1] {
                if !nodes.contains(end) {
                    return Err(ModelError::UnknownNode(end.clone()).into());
                }
            }
            if !set.insert(e.clone()) {
                return Err(ModelError::DuplicateEdge(e).into());
            }
        }
        for (s, t) in &commodities {
            for end in [s, t] {
                if !nodes.contains(end) {
                    return Err(ReductionError::UnknownTerminal(end.clone()));
                }
            }
        }
        Ok(DirEdpwcInstance {
            nodes,
            edges: set,
            commodities,
            congestion,
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn commodities(&self) -> &[(NodeId, NodeId)] {
        &self.commodities
    }

    pub fn congestion(&self) -> u32 {
        self.congestion
    }

    fn request(&self, demand: impl Fn(&NodeId) -> Rational) -> Result<RequestGraph, ReductionError> {
        let one = Rational::from_integer(1);
        let mut request = RequestGraph::new();
        for (k, (s, t)) in self.commodities.iter().enumerate() {
            let (i, j) = terminals(k);
            request.add_node(i.clone(), demand(s))?;
            request.add_node(j.clone(), demand(t))?;
            request.add_edge(i, j, one, Quantity::Infinite)?;
        }
        Ok(request)
    }
}

fn terminals(k: usize) -> (NodeId, NodeId) {
    (NodeId::new(format!("i{}", k + 1)), NodeId::new(format!("j{}", k + 1)))
}

/// Edge-capacity variant with node placement: the original graph with edge
/// capacity `c`, one unit-demand request edge per commodity and both of its
/// endpoints pinned to the commodity's terminals.
pub fn reduce_diredpwc_en(d: &DirEdpwcInstance) -> Result<VnepInstance, ReductionError> {
    let c = Quantity::from(d.congestion as i64);
    let mut substrate = SubstrateGraph::new();
    for u in &d.nodes {
        substrate.add_node(u.clone(), Quantity::Infinite)?;
    }
    for (u, v) in &d.edges {
        substrate.add_edge(u.clone(), v.clone(), c, Rational::zero())?;
    }
    let mut request = d.request(|_| Rational::zero())?;
    for (k, (s, t)) in d.commodities.iter().enumerate() {
        let (i, j) = terminals(k);
        for u in &d.nodes {
            if u != s {
                request.forbid_node(&i, u.clone())?;
            }
            if u != t {
                request.forbid_node(&j, u.clone())?;
            }
        }
    }
    Ok(VnepInstance::new(substrate, request, VariantSpec::E_N)?)
}

/// Node- and edge-capacity variant without restrictions. Every terminal
/// occurrence of `v` gets a private copy of `v` with capacity `U(v)`, where
/// `U(v)` is the 1-based rank of `v` among the node ids; originals get
/// capacity 0. The packing of demands `U(terminal)` into the copies only
/// tallies when every endpoint sits on a copy of its own terminal.
pub fn reduce_diredpwc_ve(d: &DirEdpwcInstance) -> Result<VnepInstance, ReductionError> {
    let rank: BTreeMap<&NodeId, i64> = d.nodes.iter().zip(1..).collect();
    let mut occurrences: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for (s, t) in &d.commodities {
        *occurrences.entry(s).or_default() += 1;
        *occurrences.entry(t).or_default() += 1;
    }
    let c = Quantity::from(d.congestion as i64);
    let one = Quantity::from(1);
    let zero = Rational::zero();
    let mut substrate = SubstrateGraph::new();
    for u in &d.nodes {
        substrate.add_node(u.clone(), Quantity::from(0))?;
    }
    for (u, v) in &d.edges {
        substrate.add_edge(u.clone(), v.clone(), c, zero)?;
    }
    for (&v, &count) in &occurrences {
        for h in 1..=count {
            let copy = NodeId::new(format!("{v}^{h}"));
            substrate.add_node(copy.clone(), Quantity::from(rank[v]))?;
            substrate.add_edge(v.clone(), copy.clone(), one, zero)?;
            substrate.add_edge(copy, v.clone(), one, zero)?;
        }
    }
    let request = d.request(|u| Rational::from_integer(rank[u]))?;
    Ok(VnepInstance::new(substrate, request, VariantSpec::VE_NONE)?)
}

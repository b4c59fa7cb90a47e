//! Constructive reductions from 3-SAT and from directed edge-disjoint paths
//! with congestion, plus structural checks on formula and request graphs.
//!
//! Clause indices are 1-based throughout, matching node ids `v{i}` and
//! `a{i}_{m}`.

mod edp;
mod gadget;
mod structure;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfFormula, Literal};
use crate::model::{Edge, NodeId, RequestGraph, SubstrateGraph};
use crate::rational::{Quantity, Rational};

pub use edp::{reduce_diredpwc_en, reduce_diredpwc_ve, DirEdpwcInstance};
pub use gadget::{
    decode_mapping, encode_assignment, instantiate_gadget, GadgetApprox, GadgetArtifacts,
    GadgetOptions, GadgetParams, GadgetVariant, Registry,
};
pub use structure::{
    build_formula_graph, check_4p3c, check_request_structure, is_acyclic, CheckOutcome,
    FormulaGraph, FourP3cReport, RequestStructureReport,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("formula decomposes into {0} literal-disjoint parts; instantiate each part separately")]
    Decomposed(usize),
    #[error("clause {0} shares no literal with an earlier clause")]
    NotOrdered(usize),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    Epsilon(String),
    #[error("{approx} approximation is not available for variant {variant}")]
    ApproxVariant { approx: &'static str, variant: GadgetVariant },
    #[error("lambda {lambda} must lie strictly between 0 and {bound}")]
    Lambda { lambda: String, bound: String },
    #[error("assignment does not satisfy the formula")]
    Unsatisfying,
    #[error("mapping is not a base mapping: {0}")]
    NotBaseMapping(String),
    #[error("registry: {0}")]
    Registry(String),
    #[error("commodity endpoint `{0}` is not a graph node")]
    UnknownTerminal(NodeId),
    #[error("congestion must be at least 1")]
    Congestion,
    #[error(transparent)]
    Sat(#[from] crate::sat::SatError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Truth values for the variables of one clause, satisfying that clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalAssignment {
    pub clause: usize,
    pub values: BTreeMap<u32, bool>,
}

impl LocalAssignment {
    /// Agreement on every variable both assignments define.
    pub fn agrees_with(&self, other: &LocalAssignment) -> bool {
        self.values
            .iter()
            .all(|(v, b)| other.values.get(v).map_or(true, |o| o == b))
    }
}

/// For every occurring variable, the 1-based index of the first clause that
/// contains it (either sign).
pub fn first_occurrence(formula: &CnfFormula) -> BTreeMap<u32, usize> {
    let mut first = BTreeMap::new();
    for (i, c) in formula.clauses().iter().enumerate() {
        for v in c.vars() {
            first.entry(v).or_insert(i + 1);
        }
    }
    let unused = formula.num_vars() as usize - first.len();
    if unused > 0 {
        log::debug!("{unused} declared variable(s) never occur and are ignored");
    }
    first
}

/// All satisfying assignments of clause `i` (1-based) over its variables, in
/// binary counting order with the smallest variable most significant.
pub fn local_satisfying_assignments(formula: &CnfFormula, i: usize) -> Vec<LocalAssignment> {
    let clause = &formula.clauses()[i - 1];
    let vars: Vec<u32> = clause.vars().collect();
    let lits: &[Literal] = clause.literals();
    let n = vars.len();
    (0u32..1 << n)
        .filter_map(|k| {
            let values: BTreeMap<u32, bool> = vars
                .iter()
                .enumerate()
                .map(|(p, v)| (*v, k & (1 << (n - 1 - p)) != 0))
                .collect();
            lits.iter()
                .any(|l| l.eval(values[&l.var()]))
                .then_some(LocalAssignment { clause: i, values })
        })
        .collect()
}

/// A formula whose every clause after the first shares a variable with some
/// earlier clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedFormula(CnfFormula);

impl OrderedFormula {
    pub fn formula(&self) -> &CnfFormula {
        &self.0
    }

    pub fn into_inner(self) -> CnfFormula {
        self.0
    }
}

impl TryFrom<CnfFormula> for OrderedFormula {
    type Error = ReductionError;

    fn try_from(formula: CnfFormula) -> Result<Self, Self::Error> {
        let mut seen = BTreeSet::new();
        for (i, c) in formula.clauses().iter().enumerate() {
            if i > 0 && !c.vars().any(|v| seen.contains(&v)) {
                return Err(ReductionError::NotOrdered(i + 1));
            }
            seen.extend(c.vars());
        }
        Ok(OrderedFormula(formula))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Ordered(OrderedFormula),
    /// Variable-disjoint parts, each ordered, in order of their lowest
    /// original clause index.
    Decomposed(Vec<OrderedFormula>),
}

/// Greedy reordering: start from the first clause, then repeatedly take the
/// lowest-indexed remaining clause that shares a variable with those already
/// taken. If the greedy step gets stuck the formula splits into
/// variable-disjoint components, each ordered the same way.
pub fn normalize(formula: &CnfFormula) -> Normalized {
    let parts = components(formula);
    if parts.len() <= 1 {
        return Normalized::Ordered(OrderedFormula(formula.reordered(
            &parts.into_iter().next().unwrap_or_default(),
        )));
    }
    Normalized::Decomposed(
        parts
            .iter()
            .map(|order| {
                let clauses = order.iter().map(|&k| formula.clauses()[k].clone()).collect();
                OrderedFormula(CnfFormula::new(formula.num_vars(), clauses).expect("same variables"))
            })
            .collect(),
    )
}

/// Greedy orders of the connected components, as lists of 0-based clause
/// indices.
fn components(formula: &CnfFormula) -> Vec<Vec<usize>> {
    let clauses = formula.clauses();
    let mut taken = vec![false; clauses.len()];
    let mut parts = Vec::new();
    while let Some(start) = taken.iter().position(|t| !t) {
        let mut order = vec![start];
        taken[start] = true;
        let mut vars: BTreeSet<u32> = clauses[start].vars().collect();
        while let Some(next) =
            (0..clauses.len()).find(|&k| !taken[k] && clauses[k].vars().any(|v| vars.contains(&v)))
        {
            taken[next] = true;
            vars.extend(clauses[next].vars());
            order.push(next);
        }
        parts.push(order);
    }
    parts
}

pub(crate) fn substrate_id(i: usize, m: usize) -> NodeId {
    NodeId::new(format!("a{i}_{m}"))
}

pub(crate) fn request_id(i: usize) -> NodeId {
    NodeId::new(format!("v{i}"))
}

fn shared_first_in(
    first: &BTreeMap<u32, usize>,
    formula: &CnfFormula,
    i: usize,
    j: usize,
) -> bool {
    let cj = &formula.clauses()[j - 1];
    formula.clauses()[i - 1]
        .vars()
        .any(|v| cj.contains_var(v) && first[&v] == i)
}

/// Substrate skeleton: one node per local satisfying assignment, and an edge
/// between assignments of clauses `i != j` that agree on all shared variables
/// whenever some shared variable first occurs in clause `i`. Capacities are
/// infinite and latencies zero until a gadget fills them in.
pub fn build_substrate(formula: &OrderedFormula) -> (SubstrateGraph, BTreeMap<NodeId, LocalAssignment>) {
    let phi = formula.formula();
    let first = first_occurrence(phi);
    let groups: Vec<Vec<LocalAssignment>> = (1..=phi.num_clauses())
        .map(|i| local_satisfying_assignments(phi, i))
        .collect();
    let mut substrate = SubstrateGraph::new();
    let mut registry = BTreeMap::new();
    for group in &groups {
        for (m, a) in group.iter().enumerate() {
            let id = substrate_id(a.clause, m + 1);
            substrate
                .add_node(id.clone(), Quantity::Infinite)
                .expect("fresh node ids");
            registry.insert(id, a.clone());
        }
    }
    let zero = Rational::from_integer(0);
    for i in 1..=groups.len() {
        for j in 1..=groups.len() {
            if i == j || !shared_first_in(&first, phi, i, j) {
                continue;
            }
            for (m, a) in groups[i - 1].iter().enumerate() {
                for (n, b) in groups[j - 1].iter().enumerate() {
                    if a.agrees_with(b) {
                        substrate
                            .add_edge(substrate_id(i, m + 1), substrate_id(j, n + 1), Quantity::Infinite, zero)
                            .expect("fresh edge");
                    }
                }
            }
        }
    }
    (substrate, registry)
}

/// Request skeleton: node `v{i}` per clause, edge `(v{i}, v{j})` when a
/// variable shared by both clauses first occurs in clause `i`.
pub fn build_request(formula: &OrderedFormula) -> (RequestGraph, BTreeMap<NodeId, usize>) {
    let phi = formula.formula();
    let first = first_occurrence(phi);
    let zero = Rational::from_integer(0);
    let mut request = RequestGraph::new();
    let mut registry = BTreeMap::new();
    for i in 1..=phi.num_clauses() {
        request.add_node(request_id(i), zero).expect("fresh node ids");
        registry.insert(request_id(i), i);
    }
    for i in 1..=phi.num_clauses() {
        for j in 1..=phi.num_clauses() {
            if i != j && shared_first_in(&first, phi, i, j) {
                request
                    .add_edge(request_id(i), request_id(j), zero, Quantity::Infinite)
                    .expect("fresh edge");
            }
        }
    }
    (request, registry)
}

/// Request edges of the skeleton, as clause index pairs.
pub fn request_edge_pairs(formula: &OrderedFormula) -> Vec<(usize, usize)> {
    let (request, registry) = build_request(formula);
    request
        .edges()
        .map(|e: &Edge| (registry[&e.0], registry[&e.1]))
        .collect()
}

//! Formula graphs, planar-3-SAT conditions and request-graph structure.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cnf::CnfFormula;
use crate::model::{NodeId, RequestGraph};

/// Largest graph the exact planarity search is run on.
const PLANARITY_LIMIT: usize = 12;
/// Largest graph the exact 3-connectivity check is run on.
const CONNECTIVITY_LIMIT: usize = 100;

/// Bipartite clause/variable incidence graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaGraph {
    pub clause_nodes: usize,
    pub literal_nodes: Vec<u32>,
    /// `(clause index (0-based), variable)` incidences.
    pub edges: Vec<(usize, u32)>,
}

impl FormulaGraph {
    pub fn vertex_count(&self) -> usize {
        self.clause_nodes + self.literal_nodes.len()
    }

    /// Adjacency lists with clauses first, then variables in ascending order.
    fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let offset = self.clause_nodes;
        let pos: BTreeMap<u32, usize> = self
            .literal_nodes
            .iter()
            .enumerate()
            .map(|(k, v)| (*v, offset + k))
            .collect();
        let mut adj = vec![BTreeSet::new(); self.vertex_count()];
        for &(c, v) in &self.edges {
            adj[c].insert(pos[&v]);
            adj[pos[&v]].insert(c);
        }
        adj
    }
}

pub fn build_formula_graph(formula: &CnfFormula) -> FormulaGraph {
    let edges = formula
        .clauses()
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.vars().map(move |v| (i, v)))
        .collect();
    FormulaGraph {
        clause_nodes: formula.num_clauses(),
        literal_nodes: formula.occurring_vars().into_iter().collect(),
        edges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    Unchecked,
}

impl CheckOutcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckOutcome::Pass
        } else {
            CheckOutcome::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FourP3cReport {
    /// Every clause has exactly three distinct variables.
    pub three_literals: bool,
    /// No variable occurs in more than four clauses.
    pub at_most_four_occurrences: bool,
    /// `|E| <= 2|V| - 4`, necessary for a planar bipartite graph.
    pub euler_bound: bool,
    /// Exact answer on small graphs; `Fail` whenever the Euler bound fails.
    pub planar: CheckOutcome,
    pub three_connected: CheckOutcome,
}

impl FourP3cReport {
    pub fn all_pass(&self) -> bool {
        self.three_literals
            && self.at_most_four_occurrences
            && self.planar == CheckOutcome::Pass
            && self.three_connected == CheckOutcome::Pass
    }
}

pub fn check_4p3c(formula: &CnfFormula) -> FourP3cReport {
    let g = build_formula_graph(formula);
    let three_literals = formula.clauses().iter().all(|c| c.len() == 3);
    let mut occurrences: BTreeMap<u32, usize> = BTreeMap::new();
    for &(_, v) in &g.edges {
        *occurrences.entry(v).or_default() += 1;
    }
    let at_most_four_occurrences = occurrences.values().all(|&n| n <= 4);

    let n = g.vertex_count();
    let euler_bound = n < 3 || g.edges.len() + 4 <= 2 * n;
    let adj = g.adjacency();
    let planar = if !euler_bound {
        CheckOutcome::Fail
    } else if n <= PLANARITY_LIMIT {
        CheckOutcome::from_bool(is_planar_small(&adj))
    } else {
        CheckOutcome::Unchecked
    };
    let three_connected = if n <= CONNECTIVITY_LIMIT {
        CheckOutcome::from_bool(is_three_connected(&adj))
    } else {
        CheckOutcome::Unchecked
    };
    FourP3cReport {
        three_literals,
        at_most_four_occurrences,
        euler_bound,
        planar,
        three_connected,
    }
}

fn connected_without(adj: &[BTreeSet<usize>], removed: &[usize]) -> bool {
    let alive = |v: usize| !removed.contains(&v);
    let Some(start) = (0..adj.len()).find(|&v| alive(v)) else {
        return true;
    };
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if alive(w) && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..adj.len()).all(|v| !alive(v) || seen[v])
}

/// At least four vertices and connected after deleting any one or two.
fn is_three_connected(adj: &[BTreeSet<usize>]) -> bool {
    let n = adj.len();
    if n < 4 || !connected_without(adj, &[]) {
        return false;
    }
    for a in 0..n {
        if !connected_without(adj, &[a]) {
            return false;
        }
        for b in a + 1..n {
            if !connected_without(adj, &[a, b]) {
                return false;
            }
        }
    }
    true
}

/// Exact planarity: searches for a subdivision of K5 or K3,3 after pruning
/// vertices of degree at most one.
fn is_planar_small(adj: &[BTreeSet<usize>]) -> bool {
    let mut adj = adj.to_vec();
    while let Some(v) = (0..adj.len()).find(|&v| adj[v].len() == 1) {
        let w = *adj[v].iter().next().expect("degree one");
        adj[v].clear();
        adj[w].remove(&v);
    }
    let live: Vec<usize> = (0..adj.len()).filter(|&v| !adj[v].is_empty()).collect();
    if live.len() < 5 {
        return true;
    }

    let deg = |v: usize| adj[v].len();
    let rich: Vec<usize> = live.iter().copied().filter(|&v| deg(v) >= 4).collect();
    for branch in combinations(&rich, 5) {
        let pairs: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .map(|(a, b)| (branch[a], branch[b]))
            .collect();
        if Subdivision::new(&adj, &branch).route(&pairs, 0) {
            return false;
        }
    }
    let cubic: Vec<usize> = live.iter().copied().filter(|&v| deg(v) >= 3).collect();
    for six in combinations(&cubic, 6) {
        // fix six[0] on the left side to skip mirrored partitions
        for rest in combinations(&six[1..], 2) {
            let left = [six[0], rest[0], rest[1]];
            let right: Vec<usize> = six.iter().copied().filter(|v| !left.contains(v)).collect();
            let pairs: Vec<(usize, usize)> = left
                .iter()
                .flat_map(|&a| right.iter().map(move |&b| (a, b)))
                .collect();
            if Subdivision::new(&adj, &six).route(&pairs, 0) {
                return false;
            }
        }
    }
    true
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Backtracking search for internally vertex-disjoint paths between branch
/// vertex pairs.
struct Subdivision<'a> {
    adj: &'a [BTreeSet<usize>],
    used: Vec<bool>,
    branch: Vec<bool>,
    direct: BTreeSet<(usize, usize)>,
}

impl<'a> Subdivision<'a> {
    fn new(adj: &'a [BTreeSet<usize>], branch: &[usize]) -> Self {
        let mut is_branch = vec![false; adj.len()];
        for &b in branch {
            is_branch[b] = true;
        }
        Subdivision {
            adj,
            used: vec![false; adj.len()],
            branch: is_branch,
            direct: BTreeSet::new(),
        }
    }

    fn route(&mut self, pairs: &[(usize, usize)], k: usize) -> bool {
        if k == pairs.len() {
            return true;
        }
        let (a, b) = pairs[k];
        self.walk(pairs, k, a, b)
    }

    fn walk(&mut self, pairs: &[(usize, usize)], k: usize, at: usize, target: usize) -> bool {
        let adj = self.adj;
        for &w in &adj[at] {
            if w == target {
                let key = (at.min(w), at.max(w));
                // a direct edge between the two branch vertices can be used once
                if self.branch[at] {
                    if self.direct.contains(&key) {
                        continue;
                    }
                    self.direct.insert(key);
                    let ok = self.route(pairs, k + 1);
                    self.direct.remove(&key);
                    if ok {
                        return true;
                    }
                    continue;
                }
                if self.route(pairs, k + 1) {
                    return true;
                }
                continue;
            }
            if self.branch[w] || self.used[w] {
                continue;
            }
            self.used[w] = true;
            let ok = self.walk(pairs, k, w, target);
            self.used[w] = false;
            if ok {
                return true;
            }
        }
        false
    }
}

/// Whether the directed graph given by `edges` over `nodes` has no cycle.
pub fn is_acyclic<'a>(
    nodes: impl IntoIterator<Item = &'a NodeId>,
    edges: impl IntoIterator<Item = &'a (NodeId, NodeId)>,
) -> bool {
    let mut indegree: BTreeMap<&NodeId, usize> = nodes.into_iter().map(|n| (n, 0)).collect();
    let mut out: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for (u, v) in edges {
        *indegree.entry(v).or_default() += 1;
        indegree.entry(u).or_default();
        out.entry(u).or_default().push(v);
    }
    let mut ready: Vec<&NodeId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut removed = 0;
    while let Some(u) = ready.pop() {
        removed += 1;
        for v in out.get(u).into_iter().flatten() {
            let d = indegree.get_mut(v).expect("counted");
            *d -= 1;
            if *d == 0 {
                ready.push(v);
            }
        }
    }
    removed == indegree.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RequestStructureReport {
    /// Largest in-degree plus out-degree.
    pub max_degree: usize,
    pub degree_at_most_12: bool,
    pub acyclic: bool,
    /// `|E| <= 3|V| - 6`, vacuous below three nodes.
    pub planar_edge_bound: bool,
}

pub fn check_request_structure(r: &RequestGraph) -> RequestStructureReport {
    let mut degree: BTreeMap<&NodeId, usize> = r.nodes().map(|n| (n, 0)).collect();
    for (u, v) in r.edges() {
        *degree.get_mut(u).expect("endpoint") += 1;
        *degree.get_mut(v).expect("endpoint") += 1;
    }
    let max_degree = degree.values().copied().max().unwrap_or(0);
    let n = r.node_count();
    RequestStructureReport {
        max_degree,
        degree_at_most_12: max_degree <= 12,
        acyclic: is_acyclic(r.nodes(), r.edges()),
        planar_edge_bound: n < 3 || r.edge_count() + 6 <= 3 * n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    fn complete(n: usize) -> Vec<BTreeSet<usize>> {
        let e: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        graph(n, &e)
    }

    #[test]
    fn kuratowski_graphs() {
        assert!(!is_planar_small(&complete(5)));
        assert!(is_planar_small(&complete(4)));
        let k33: Vec<_> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        assert!(!is_planar_small(&graph(6, &k33)));
        // K5 minus one edge is planar
        let mut k5 = complete(5);
        k5[0].remove(&1);
        k5[1].remove(&0);
        assert!(is_planar_small(&k5));
        // subdividing every edge of K5 keeps it nonplanar
        let mut edges = Vec::new();
        let mut next = 5;
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((a, next));
                edges.push((next, b));
                next += 1;
            }
        }
        assert!(!is_planar_small(&graph(next, &edges)));
    }

    #[test]
    fn petersen_is_nonplanar_and_three_connected() {
        let outer: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<_> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<_> = (0..5).map(|i| (i + 5, (i + 2) % 5 + 5)).collect();
        let all: Vec<_> = outer.into_iter().chain(spokes).chain(inner).collect();
        let p = graph(10, &all);
        assert!(!is_planar_small(&p));
        assert!(is_three_connected(&p));
    }

    #[test]
    fn connectivity() {
        assert!(is_three_connected(&complete(4)));
        let cycle: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        assert!(!is_three_connected(&graph(6, &cycle)));
        assert!(!is_three_connected(&complete(3)));
    }

    #[test]
    fn three_clause_example() {
        let phi = CnfFormula::from_clauses(&[&[1, 2, 3], &[-1, 2, 4], &[2, -3, 4]]).unwrap();
        let g = build_formula_graph(&phi);
        assert_eq!((g.clause_nodes, g.literal_nodes.len(), g.edges.len()), (3, 4, 9));
        let report = check_4p3c(&phi);
        assert!(report.three_literals && report.at_most_four_occurrences && report.euler_bound);
        assert_eq!(report.planar, CheckOutcome::Pass);
    }

    #[test]
    fn occurrence_and_width_conditions() {
        let five: Vec<Vec<i32>> = (0..5).map(|k| vec![1, 2 + 2 * k, 3 + 2 * k]).collect();
        let refs: Vec<&[i32]> = five.iter().map(|c| c.as_slice()).collect();
        let report = check_4p3c(&CnfFormula::from_clauses(&refs).unwrap());
        assert!(!report.at_most_four_occurrences);
        let narrow = check_4p3c(&CnfFormula::from_clauses(&[&[1, 2]]).unwrap());
        assert!(!narrow.three_literals);
    }

    #[test]
    fn acyclicity() {
        let ids: Vec<NodeId> = ["a", "b", "c"].iter().map(|s| NodeId::from(*s)).collect();
        let chain = vec![(ids[0].clone(), ids[1].clone()), (ids[1].clone(), ids[2].clone())];
        assert!(is_acyclic(&ids, &chain));
        let mut cycle = chain.clone();
        cycle.push((ids[2].clone(), ids[0].clone()));
        assert!(!is_acyclic(&ids, &cycle));
    }
}

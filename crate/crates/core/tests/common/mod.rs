//! Deliberately naive reference implementations and instance generators
//! shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnepkit::{
    allowed_edges, allowed_nodes, edge, is_approx_feasible, ApproxFactors, Edge, Mapping, NodeId,
    Quantity, RequestGraph, SubstrateGraph, VariantSpec, VnepInstance,
};
use vnepkit::rational::{int, Rational};

/// Every simple path from `from` to `to` as an edge list; the empty path when
/// the endpoints coincide.
pub fn simple_paths(nodes: &[NodeId], edges: &[Edge], from: &NodeId, to: &NodeId) -> Vec<Vec<Edge>> {
    if from == to {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut seen: BTreeSet<NodeId> = BTreeSet::from([from.clone()]);
    fn go(
        edges: &[Edge],
        at: &NodeId,
        to: &NodeId,
        path: &mut Vec<Edge>,
        seen: &mut BTreeSet<NodeId>,
        out: &mut Vec<Vec<Edge>>,
    ) {
        for e in edges.iter().filter(|e| &e.0 == at) {
            if seen.contains(&e.1) {
                continue;
            }
            path.push(e.clone());
            if &e.1 == to {
                out.push(path.clone());
            } else {
                seen.insert(e.1.clone());
                go(edges, &e.1, to, path, seen, out);
                seen.remove(&e.1);
            }
            path.pop();
        }
    }
    let _ = nodes;
    go(edges, from, to, &mut path, &mut seen, &mut out);
    out
}

/// Tries every node map and every combination of simple paths; checks each
/// candidate with the validator. Paths that use a disallowed edge are dropped
/// up front since no feasible mapping can contain them.
pub fn naive_feasible(instance: &VnepInstance, factors: &ApproxFactors) -> Option<Mapping> {
    let s_nodes: Vec<NodeId> = instance.substrate().nodes().cloned().collect();
    let s_edges: Vec<Edge> = instance.substrate().edges().cloned().collect();
    let r_nodes: Vec<NodeId> = instance.request().nodes().cloned().collect();
    let r_edges: Vec<Edge> = instance.request().edges().cloned().collect();
    let allowed: Vec<BTreeSet<Edge>> = r_edges
        .iter()
        .map(|e| allowed_edges(instance, e).unwrap())
        .collect();
    let hosts: Vec<BTreeSet<NodeId>> = r_nodes.iter().map(|i| allowed_nodes(instance, i).unwrap()).collect();

    let n = r_nodes.len();
    if s_nodes.is_empty() && n > 0 {
        return None;
    }
    let mut choice = vec![0usize; n];
    loop {
        let node_map: BTreeMap<NodeId, NodeId> = r_nodes
            .iter()
            .zip(&choice)
            .map(|(i, &k)| (i.clone(), s_nodes[k].clone()))
            .collect();
        let hosted = r_nodes.iter().enumerate().all(|(k, i)| hosts[k].contains(&node_map[i]));
        if hosted {
            let options: Vec<Vec<Vec<Edge>>> = r_edges
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    simple_paths(&s_nodes, &s_edges, &node_map[&e.0], &node_map[&e.1])
                        .into_iter()
                        .filter(|p| p.iter().all(|se| allowed[k].contains(se)))
                        .collect()
                })
                .collect();
            if let Some(m) = first_feasible_combination(instance, factors, &node_map, &r_edges, &options) {
                return Some(m);
            }
        }
        // odometer over node maps
        let mut pos = 0;
        loop {
            if pos == n {
                return None;
            }
            choice[pos] += 1;
            if choice[pos] < s_nodes.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn first_feasible_combination(
    instance: &VnepInstance,
    factors: &ApproxFactors,
    node_map: &BTreeMap<NodeId, NodeId>,
    r_edges: &[Edge],
    options: &[Vec<Vec<Edge>>],
) -> Option<Mapping> {
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut m = Mapping::new();
        m.node_map = node_map.clone();
        for (k, e) in r_edges.iter().enumerate() {
            m.edge_map.insert(e.clone(), options[k][idx[k]].clone());
        }
        if is_approx_feasible(instance, &m, factors).unwrap().is_ok() {
            return Some(m);
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return None;
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Naive directed edge-disjoint paths with congestion: all simple-path
/// combinations, counting edge loads.
pub fn naive_edp(nodes: &[NodeId], edges: &[Edge], commodities: &[(NodeId, NodeId)], c: u32) -> bool {
    let options: Vec<Vec<Vec<Edge>>> = commodities
        .iter()
        .map(|(s, t)| simple_paths(nodes, edges, s, t))
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return false;
    }
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut load: BTreeMap<&Edge, u32> = BTreeMap::new();
        for (k, o) in options.iter().enumerate() {
            for e in &o[idx[k]] {
                *load.entry(e).or_default() += 1;
            }
        }
        if load.values().all(|&l| l <= c) {
            return true;
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return false;
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn small_quantity(rng: &mut ChaCha8Rng) -> Quantity {
    if rng.gen_bool(0.15) {
        Quantity::Infinite
    } else {
        Quantity::Finite(int(rng.gen_range(0..=2)))
    }
}

/// Random instance with up to `max_sub` substrate and `max_req` request
/// nodes, capacities and demands in {0, 1, 2}, and a random variant.
pub fn random_instance(seed: u64, max_sub: usize, max_req: usize) -> VnepInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = rng.gen_range(1..=max_sub);
    let nr = rng.gen_range(1..=max_req);
    let density = rng.gen_range(0.15..0.5);
    let s_ids: Vec<String> = (0..ns).map(|k| format!("s{k}")).collect();
    let r_ids: Vec<String> = (0..nr).map(|k| format!("r{k}")).collect();

    let mut substrate = SubstrateGraph::new();
    for u in &s_ids {
        substrate.add_node(u.as_str(), small_quantity(&mut rng)).unwrap();
    }
    let mut s_edges = Vec::new();
    for u in &s_ids {
        for v in &s_ids {
            if u != v && rng.gen_bool(density) {
                let lat = int(rng.gen_range(0..=2));
                substrate.add_edge(u.as_str(), v.as_str(), small_quantity(&mut rng), lat).unwrap();
                s_edges.push(edge(u.as_str(), v.as_str()));
            }
        }
    }
    let mut request = RequestGraph::new();
    for i in &r_ids {
        request.add_node(i.as_str(), int(rng.gen_range(0..=2))).unwrap();
    }
    let mut edge_budget = 3;
    for i in &r_ids {
        for j in &r_ids {
            if i != j && edge_budget > 0 && rng.gen_bool(0.35) {
                edge_budget -= 1;
                let bound = if rng.gen_bool(0.3) {
                    Quantity::Infinite
                } else {
                    Quantity::Finite(int(rng.gen_range(0..=4)))
                };
                request
                    .add_edge(i.as_str(), j.as_str(), int(rng.gen_range(0..=2)), bound)
                    .unwrap();
            }
        }
    }
    for i in &r_ids {
        for u in &s_ids {
            if rng.gen_bool(0.2) {
                request.forbid_node(&NodeId::from(i.as_str()), u.as_str()).unwrap();
            }
        }
    }
    let r_edges: Vec<Edge> = request.edges().cloned().collect();
    for e in &r_edges {
        for se in &s_edges {
            if rng.gen_bool(0.2) {
                request.forbid_edge(e, se.clone()).unwrap();
            }
        }
    }
    let bits: u8 = rng.gen_range(0..32);
    let variant = VariantSpec::new(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0, bits & 16 != 0);
    VnepInstance::new(substrate, request, variant).unwrap()
}

/// Same instance with every node id replaced by a fresh random label.
pub fn relabel(instance: &VnepInstance, seed: u64) -> VnepInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rename = |ids: Vec<NodeId>, prefix: &str, rng: &mut ChaCha8Rng| -> BTreeMap<NodeId, NodeId> {
        let mut labels: Vec<usize> = (0..ids.len()).collect();
        labels.shuffle(rng);
        ids.into_iter()
            .zip(labels)
            .map(|(id, l)| (id, NodeId::new(format!("{prefix}{l}"))))
            .collect()
    };
    let s_map = rename(instance.substrate().nodes().cloned().collect(), "u", &mut rng);
    let r_map = rename(instance.request().nodes().cloned().collect(), "q", &mut rng);
    let se = |e: &Edge| (s_map[&e.0].clone(), s_map[&e.1].clone());

    let s = instance.substrate();
    let mut substrate = SubstrateGraph::new();
    for u in s.nodes() {
        substrate.add_node(s_map[u].clone(), s.node_capacity(u).unwrap()).unwrap();
    }
    for e in s.edges() {
        let (a, b) = se(e);
        substrate.add_edge(a, b, s.edge_capacity(e).unwrap(), s.edge_latency(e).unwrap()).unwrap();
    }
    let r = instance.request();
    let mut request = RequestGraph::new();
    for i in r.nodes() {
        let node = r.node(i).unwrap();
        request.add_node(r_map[i].clone(), node.demand).unwrap();
        for u in &node.forbidden {
            request.forbid_node(&r_map[i], s_map[u].clone()).unwrap();
        }
    }
    for e in r.edges() {
        let d = r.edge(e).unwrap();
        let key = (r_map[&e.0].clone(), r_map[&e.1].clone());
        request.add_edge(key.0.clone(), key.1.clone(), d.demand, d.latency_bound).unwrap();
        for f in &d.forbidden {
            request.forbid_edge(&key, se(f)).unwrap();
        }
    }
    VnepInstance::new(substrate, request, instance.variant()).unwrap()
}

pub fn factors(alpha: Rational, beta: Rational, gamma: Rational) -> ApproxFactors {
    ApproxFactors::new(alpha, beta, gamma).unwrap()
}

/// Random formula over variables `1..=n` with `m` clauses of width 1 to 3.
pub fn mixed_formula(rng: &mut ChaCha8Rng, n: u32, m: usize) -> vnepkit::CnfFormula {
    let clauses: Vec<Vec<i32>> = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=n.min(3) as usize);
            let mut vars: Vec<i32> = (1..=n as i32).collect();
            vars.shuffle(rng);
            vars.truncate(width);
            vars.into_iter().map(|v| if rng.gen_bool(0.5) { v } else { -v }).collect()
        })
        .collect();
    let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
    vnepkit::CnfFormula::from_clauses(&refs).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest sorted clause multiset over all variable permutations and sign
/// flips; equal for formulas that differ only by such a renaming.
pub fn canonical_form(phi: &vnepkit::CnfFormula) -> Vec<Vec<i32>> {
    let n = phi.num_vars() as usize;
    let mut best: Option<Vec<Vec<i32>>> = None;
    for perm in permutations(n) {
        for flips in 0u32..1 << n {
            let mut clauses: Vec<Vec<i32>> = phi
                .clauses()
                .iter()
                .map(|c| {
                    let mut lits: Vec<i32> = c
                        .literals()
                        .iter()
                        .map(|l| {
                            let k = l.var() as usize - 1;
                            let v = perm[k] as i32 + 1;
                            let sign = l.is_positive() != (flips & (1 << k) != 0);
                            if sign { v } else { -v }
                        })
                        .collect();
                    lits.sort_unstable_by_key(|l| (l.abs(), *l));
                    lits
                })
                .collect();
            clauses.sort();
            if best.as_ref().map_or(true, |b| &clauses < b) {
                best = Some(clauses);
            }
        }
    }
    best.unwrap_or_default()
}

/// `count` pairwise non-isomorphic formulas with at most `max_n` variables
/// and `max_m` clauses of width 1 to 3.
pub fn formula_grid(count: usize, max_n: u32, max_m: usize, seed: u64) -> Vec<vnepkit::CnfFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let n = rng.gen_range(1..=max_n);
        let m = rng.gen_range(1..=max_m);
        let phi = mixed_formula(&mut rng, n, m);
        if seen.insert(canonical_form(&phi)) {
            out.push(phi);
        }
    }
    out
}

/// Random clauses of three distinct variables where no variable occurs more
/// than four times.
pub fn bounded_occurrence_formula(rng: &mut ChaCha8Rng, n: u32, m: usize) -> vnepkit::CnfFormula {
    let mut count = vec![0u32; n as usize + 1];
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut attempts = 0;
    while clauses.len() < m && attempts < 10_000 {
        attempts += 1;
        let free: Vec<i32> = (1..=n as i32).filter(|v| count[*v as usize] < 4).collect();
        if free.len() < 3 {
            break;
        }
        let vars: Vec<i32> = free.choose_multiple(rng, 3).copied().collect();
        for v in &vars {
            count[*v as usize] += 1;
        }
        clauses.push(vars.into_iter().map(|v| if rng.gen_bool(0.5) { v } else { -v }).collect());
    }
    let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
    vnepkit::CnfFormula::from_clauses(&refs).unwrap()
}

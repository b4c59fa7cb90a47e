//! Exact decision procedure for every variant.
//!
//! Request nodes are assigned in fail-first order (fewest allowed hosts, ties
//! by id). As soon as both endpoints of a request edge are placed, the edge is
//! routed by depth-first enumeration of simple substrate paths restricted to
//! the edge's allowed set, the residual capacities and the remaining latency
//! budget. Backtracking covers both levels, so `Infeasible` is only reported
//! after the whole space has been exhausted.

mod lp;

use std::time::{Duration, Instant};

use num_traits::Zero;
use serde::Serialize;

use crate::model::{Edge, Mapping, ModelError, NodeId, VnepInstance};
use crate::rational::{Quantity, Rational};
use crate::validate::{self, ApproxFactors, Report};

pub use lp::{build_ip, emit_ip, ConstraintFamily, IpModel, IpRow, Sense};

/// Search budget. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_search_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SolveLimits {
    pub const DEFAULT_MAX_SEARCH_NODES: u64 = 10_000_000;

    pub fn unlimited() -> Self {
        SolveLimits {
            max_search_nodes: None,
            max_time: None,
        }
    }
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_search_nodes: Some(Self::DEFAULT_MAX_SEARCH_NODES),
            max_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible(Mapping),
    Infeasible,
    ResourceLimit,
}

impl SolveStatus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveStatus::Feasible(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Feasible(_) => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::ResourceLimit => "resource_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SolveStats {
    /// Host assignments tried plus path extensions explored.
    pub nodes_explored: u64,
    /// Complete substrate paths found for request edges.
    pub paths_enumerated: u64,
    #[serde(serialize_with = "seconds")]
    pub wall_time: Duration,
}

fn seconds<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Found,
    Exhausted,
    Limit,
}

#[derive(Debug, Clone, Copy)]
enum Undo {
    Node(usize, Rational),
    Edge(usize, Rational),
}

/// Index-based view of an instance with limits already scaled by the factors.
struct Search<'a> {
    instance: &'a VnepInstance,
    s_ids: Vec<&'a NodeId>,
    s_edges: Vec<(usize, usize)>,
    s_edge_ids: Vec<&'a Edge>,
    out_adj: Vec<Vec<usize>>,
    latency: Vec<Rational>,
    node_limit: Vec<Quantity>,
    edge_limit: Vec<Quantity>,

    r_ids: Vec<&'a NodeId>,
    r_demand: Vec<Rational>,
    allowed_hosts: Vec<Vec<usize>>,
    r_edges: Vec<(usize, usize)>,
    r_edge_ids: Vec<&'a Edge>,
    r_edge_demand: Vec<Rational>,
    allowed_edge: Vec<Vec<bool>>,
    latency_budget: Vec<Quantity>,

    order: Vec<usize>,
    edges_at: Vec<Vec<usize>>,

    node_used: Vec<Rational>,
    edge_used: Vec<Rational>,
    trail: Vec<Undo>,
    host: Vec<Option<usize>>,
    paths: Vec<Vec<usize>>,
    visited: Vec<Vec<bool>>,

    factors: ApproxFactors,
    limits: SolveLimits,
    started: Instant,
    stats: SolveStats,
    solution: Option<Mapping>,
}

impl<'a> Search<'a> {
    fn new(instance: &'a VnepInstance, factors: &ApproxFactors, limits: SolveLimits) -> Self {
        let substrate = instance.substrate();
        let request = instance.request();
        let s_ids: Vec<&NodeId> = substrate.nodes().collect();
        let s_index = |id: &NodeId| s_ids.binary_search(&id).expect("substrate node");
        let s_edge_ids: Vec<&Edge> = substrate.edges().collect();
        let s_edges: Vec<(usize, usize)> = s_edge_ids
            .iter()
            .map(|(a, b)| (s_index(a), s_index(b)))
            .collect();
        // Edges are sorted by (tail, head), so each adjacency list is sorted by head.
        let mut out_adj = vec![Vec::new(); s_ids.len()];
        for (k, &(a, _)) in s_edges.iter().enumerate() {
            out_adj[a].push(k);
        }
        let latency = s_edge_ids
            .iter()
            .map(|e| substrate.edge_latency(e).expect("edge"))
            .collect();
        let node_limit = s_ids
            .iter()
            .map(|u| substrate.node_capacity(u).expect("node").scaled(factors.alpha()))
            .collect();
        let edge_limit = s_edge_ids
            .iter()
            .map(|e| substrate.edge_capacity(e).expect("edge").scaled(factors.beta()))
            .collect();

        let r_ids: Vec<&NodeId> = request.nodes().collect();
        let r_index = |id: &NodeId| r_ids.binary_search(&id).expect("request node");
        let r_demand = r_ids.iter().map(|i| request.node(i).expect("node").demand).collect();
        let allowed_hosts = r_ids
            .iter()
            .map(|i| {
                let allowed = validate::allowed_nodes(instance, i).expect("request node");
                allowed.iter().map(&s_index).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let r_edge_ids: Vec<&Edge> = request.edges().collect();
        let r_edges: Vec<(usize, usize)> = r_edge_ids
            .iter()
            .map(|(a, b)| (r_index(a), r_index(b)))
            .collect();
        let r_edge_demand = r_edge_ids
            .iter()
            .map(|e| request.edge(e).expect("edge").demand)
            .collect();
        let allowed_edge = r_edge_ids
            .iter()
            .map(|e| {
                let allowed = validate::allowed_edges(instance, e).expect("request edge");
                s_edge_ids.iter().map(|se| allowed.contains(*se)).collect()
            })
            .collect();
        let latency_budget = r_edge_ids
            .iter()
            .map(|e| {
                if instance.variant().latency {
                    request
                        .edge(e)
                        .expect("edge")
                        .latency_bound
                        .scaled(factors.gamma())
                } else {
                    Quantity::Infinite
                }
            })
            .collect();

        let mut order: Vec<usize> = (0..r_ids.len()).collect();
        order.sort_by(|&a, &b| {
            allowed_hosts[a]
                .len()
                .cmp(&allowed_hosts[b].len())
                .then_with(|| r_ids[a].cmp(r_ids[b]))
        });
        let mut position = vec![0; r_ids.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        let mut edges_at = vec![Vec::new(); r_ids.len()];
        for (k, &(a, b)) in r_edges.iter().enumerate() {
            edges_at[position[a].max(position[b])].push(k);
        }

        let n_req_edges = r_edges.len();
        let n_sub = s_ids.len();
        Search {
            instance,
            node_used: vec![Rational::zero(); n_sub],
            edge_used: vec![Rational::zero(); s_edges.len()],
            s_ids,
            s_edges,
            s_edge_ids,
            out_adj,
            latency,
            node_limit,
            edge_limit,
            host: vec![None; r_ids.len()],
            r_ids,
            r_demand,
            allowed_hosts,
            r_edges,
            r_edge_ids,
            r_edge_demand,
            allowed_edge,
            latency_budget,
            order,
            edges_at,
            trail: Vec::new(),
            paths: vec![Vec::new(); n_req_edges],
            visited: vec![vec![false; n_sub]; n_req_edges],
            factors: *factors,
            limits,
            started: Instant::now(),
            stats: SolveStats::default(),
            solution: None,
        }
    }

    fn tick(&mut self) -> bool {
        self.stats.nodes_explored += 1;
        if let Some(max) = self.limits.max_search_nodes {
            if self.stats.nodes_explored > max {
                return false;
            }
        }
        if let Some(max) = self.limits.max_time {
            if self.stats.nodes_explored % 1024 == 0 && self.started.elapsed() > max {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("nonempty trail") {
                Undo::Node(u, d) => self.node_used[u] -= d,
                Undo::Edge(e, d) => self.edge_used[e] -= d,
            }
        }
    }

    fn assign(&mut self, p: usize) -> Outcome {
        if p == self.order.len() {
            self.solution = Some(self.current_mapping());
            return Outcome::Found;
        }
        let i = self.order[p];
        let demand = self.r_demand[i];
        for k in 0..self.allowed_hosts[i].len() {
            if !self.tick() {
                return Outcome::Limit;
            }
            let u = self.allowed_hosts[i][k];
            if !self.node_limit[u].admits(self.node_used[u] + demand) {
                continue;
            }
            let mark = self.trail.len();
            self.node_used[u] += demand;
            self.trail.push(Undo::Node(u, demand));
            self.host[i] = Some(u);
            let r = self.route(p, 0);
            self.host[i] = None;
            self.undo_to(mark);
            if r != Outcome::Exhausted {
                return r;
            }
        }
        Outcome::Exhausted
    }

    fn route(&mut self, p: usize, k: usize) -> Outcome {
        if k == self.edges_at[p].len() {
            return self.assign(p + 1);
        }
        let e = self.edges_at[p][k];
        let (i, j) = self.r_edges[e];
        let src = self.host[i].expect("tail placed");
        let dst = self.host[j].expect("head placed");
        if src == dst {
            self.paths[e].clear();
            return self.route(p, k + 1);
        }
        self.visited[e][src] = true;
        let r = self.extend(e, src, dst, Rational::zero(), p, k);
        self.visited[e][src] = false;
        r
    }

    /// Depth-first extension of the partial path for request edge `e`, whose
    /// last node is `at`. Heads are tried in id order.
    fn extend(&mut self, e: usize, at: usize, dst: usize, latency: Rational, p: usize, k: usize) -> Outcome {
        let demand = self.r_edge_demand[e];
        for idx in 0..self.out_adj[at].len() {
            let se = self.out_adj[at][idx];
            let head = self.s_edges[se].1;
            if self.visited[e][head] || !self.allowed_edge[e][se] {
                continue;
            }
            if !self.edge_limit[se].admits(self.edge_used[se] + demand) {
                continue;
            }
            let reached = latency + self.latency[se];
            if !self.latency_budget[e].admits(reached) {
                continue;
            }
            if !self.tick() {
                return Outcome::Limit;
            }
            let mark = self.trail.len();
            self.edge_used[se] += demand;
            self.trail.push(Undo::Edge(se, demand));
            self.paths[e].push(se);
            let r = if head == dst {
                self.stats.paths_enumerated += 1;
                self.route(p, k + 1)
            } else {
                self.visited[e][head] = true;
                let r = self.extend(e, head, dst, reached, p, k);
                self.visited[e][head] = false;
                r
            };
            self.paths[e].pop();
            self.undo_to(mark);
            if r != Outcome::Exhausted {
                return r;
            }
        }
        Outcome::Exhausted
    }

    fn current_mapping(&self) -> Mapping {
        let mut m = Mapping::new();
        for (i, h) in self.host.iter().enumerate() {
            let u = h.expect("all nodes placed");
            m.node_map
                .insert(self.r_ids[i].clone(), self.s_ids[u].clone());
        }
        for (e, path) in self.paths.iter().enumerate() {
            m.edge_map.insert(
                self.r_edge_ids[e].clone(),
                path.iter().map(|&se| self.s_edge_ids[se].clone()).collect(),
            );
        }
        m
    }

    fn run(mut self) -> SolveResult {
        let outcome = self.assign(0);
        self.stats.wall_time = self.started.elapsed();
        let status = match outcome {
            Outcome::Found => SolveStatus::Feasible(self.solution.take().expect("solution stored")),
            Outcome::Exhausted => SolveStatus::Infeasible,
            Outcome::Limit => SolveStatus::ResourceLimit,
        };
        debug_assert!(match &status {
            SolveStatus::Feasible(m) => validate::is_approx_feasible(self.instance, m, &self.factors)
                .map(|r| r.is_ok())
                .unwrap_or(false),
            _ => true,
        });
        SolveResult {
            status,
            stats: self.stats,
        }
    }
}

/// Decides whether a feasible (or, with `factors`, approximately feasible)
/// embedding exists.
///
/// With factors, cumulative node/edge allocations and path latencies are
/// checked against `alpha`/`beta`/`gamma` times the original limits while the
/// per-element suitability filters keep the original capacities.
pub fn solve_decision(
    instance: &VnepInstance,
    factors: Option<&ApproxFactors>,
    limits: SolveLimits,
) -> SolveResult {
    let factors = factors.copied().unwrap_or_default();
    Search::new(instance, &factors, limits).run()
}

/// Checks a mapping as a certificate: plain feasibility, or approximate
/// feasibility when factors are given.
pub fn verify_certificate(
    instance: &VnepInstance,
    m: &Mapping,
    factors: Option<&ApproxFactors>,
) -> Result<Report, ModelError> {
    match factors {
        Some(f) => validate::is_approx_feasible(instance, m, f),
        None => validate::is_feasible(instance, m),
    }
}

//! 3-SAT gadgets for the five hard variants and the assignment
//! encoder/decoder that connects feasible mappings with satisfying
//! assignments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{
    build_request, build_substrate, normalize, LocalAssignment, Normalized,
    OrderedFormula, ReductionError,
};
use crate::cnf::{Clause, CnfFormula};
use crate::format::FORMAT_VERSION;
use crate::model::{Mapping, NodeId, RequestGraph, SubstrateGraph, VariantSpec, VnepInstance};
use crate::rational::{format_rational, parse_rational, Quantity, Rational};
use crate::sat::{evaluate, Assignment};
use crate::validate::ApproxFactors;

/// The five variants covered by the gadgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GadgetVariant {
    /// Node and edge capacities.
    VeNone,
    /// Edge capacities and node placement restrictions.
    EN,
    /// Node capacities and routing restrictions.
    VR,
    /// Node placement and routing restrictions.
    NoneNR,
    /// Node placement and latency restrictions.
    NoneNL,
}

impl GadgetVariant {
    pub const ALL: [GadgetVariant; 5] = [
        GadgetVariant::VeNone,
        GadgetVariant::EN,
        GadgetVariant::VR,
        GadgetVariant::NoneNR,
        GadgetVariant::NoneNL,
    ];

    pub fn spec(self) -> VariantSpec {
        match self {
            GadgetVariant::VeNone => VariantSpec::VE_NONE,
            GadgetVariant::EN => VariantSpec::E_N,
            GadgetVariant::VR => VariantSpec::V_R,
            GadgetVariant::NoneNR => VariantSpec::NONE_NR,
            GadgetVariant::NoneNL => VariantSpec::NONE_NL,
        }
    }

    /// Short CLI name.
    pub fn short_name(self) -> &'static str {
        match self {
            GadgetVariant::VeNone => "ve",
            GadgetVariant::EN => "en",
            GadgetVariant::VR => "vr",
            GadgetVariant::NoneNR => "nr",
            GadgetVariant::NoneNL => "nl",
        }
    }

    fn node_capacities(self) -> bool {
        matches!(self, GadgetVariant::VeNone | GadgetVariant::VR)
    }

    fn edge_capacities(self) -> bool {
        matches!(self, GadgetVariant::VeNone | GadgetVariant::EN)
    }

    fn pins_nodes(self) -> bool {
        matches!(self, GadgetVariant::EN | GadgetVariant::NoneNR | GadgetVariant::NoneNL)
    }

    fn pins_edges(self) -> bool {
        matches!(self, GadgetVariant::VR | GadgetVariant::NoneNR)
    }
}

impl fmt::Display for GadgetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.spec(), f)
    }
}

impl FromStr for GadgetVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GadgetVariant::ALL
            .into_iter()
            .find(|v| v.short_name().eq_ignore_ascii_case(s) || v.to_string() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected ve, en, vr, nr or nl)"))
    }
}

impl Serialize for GadgetVariant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.short_name())
    }
}

impl<'de> Deserialize<'de> for GadgetVariant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Approximation-hardness instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetApprox {
    /// Node-capacity violation by a factor below `2 - eps` stays hard.
    AlphaEps(Rational),
    /// Latency violation by a factor below `2 - eps` stays hard.
    Gamma(Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GadgetOptions {
    pub approx: Option<GadgetApprox>,
    /// Overrides the default `lambda`.
    pub lambda: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetParams {
    pub variant: GadgetVariant,
    /// Only for variants with capacities.
    pub lambda: Option<Rational>,
    pub epsilon: Option<Rational>,
    /// Factors at which the gadget still separates satisfiable from
    /// unsatisfiable formulas.
    pub factors: Option<ApproxFactors>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetArtifacts {
    pub instance: VnepInstance,
    /// The formula in the clause order the gadget was built from.
    pub formula: OrderedFormula,
    pub node_registry: BTreeMap<NodeId, LocalAssignment>,
    pub request_registry: BTreeMap<NodeId, usize>,
    pub params: GadgetParams,
}

/// JSON side-file describing a gadget.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub format_version: u32,
    pub variant: GadgetVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<BTreeMap<String, String>>,
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    pub substrate_nodes: BTreeMap<NodeId, LocalAssignment>,
    pub request_nodes: BTreeMap<NodeId, usize>,
}

impl GadgetArtifacts {
    pub fn registry(&self) -> Registry {
        let factors = self.params.factors.map(|f| {
            BTreeMap::from([
                ("alpha".to_string(), format_rational(&f.alpha())),
                ("beta".to_string(), format_rational(&f.beta())),
                ("gamma".to_string(), format_rational(&f.gamma())),
            ])
        });
        Registry {
            format_version: FORMAT_VERSION,
            variant: self.params.variant,
            lambda: self.params.lambda.as_ref().map(format_rational),
            epsilon: self.params.epsilon.as_ref().map(format_rational),
            factors,
            num_vars: self.formula.formula().num_vars(),
            clauses: self
                .formula
                .formula()
                .clauses()
                .iter()
                .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
                .collect(),
            substrate_nodes: self.node_registry.clone(),
            request_nodes: self.request_registry.clone(),
        }
    }

    pub fn registry_json(&self) -> String {
        serde_json::to_string_pretty(&self.registry()).expect("registry serializes")
    }

    /// Reassembles artifacts from an instance and its registry side-file.
    pub fn from_registry(instance: VnepInstance, registry_json: &str) -> Result<Self, ReductionError> {
        let bad = |m: String| ReductionError::Registry(m);
        let reg: Registry = serde_json::from_str(registry_json).map_err(|e| bad(e.to_string()))?;
        if reg.format_version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format_version {}", reg.format_version)));
        }
        let rational = |s: &Option<String>| -> Result<Option<Rational>, ReductionError> {
            s.as_deref()
                .map(|t| parse_rational(t).map_err(|e| bad(e.to_string())))
                .transpose()
        };
        let factors = match &reg.factors {
            None => None,
            Some(map) => {
                let get = |k: &str| -> Result<Rational, ReductionError> {
                    let t = map.get(k).ok_or_else(|| bad(format!("factor `{k}` missing")))?;
                    parse_rational(t).map_err(|e| bad(e.to_string()))
                };
                Some(ApproxFactors::new(get("alpha")?, get("beta")?, get("gamma")?)?)
            }
        };
        let clauses = reg
            .clauses
            .iter()
            .map(|c| Clause::new(c).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let formula = CnfFormula::new(reg.num_vars, clauses).map_err(|e| bad(e.to_string()))?;
        let formula = OrderedFormula::try_from(formula)?;
        for id in reg.substrate_nodes.keys() {
            if !instance.substrate().contains_node(id) {
                return Err(bad(format!("substrate node `{id}` not in instance")));
            }
        }
        for (id, &i) in &reg.request_nodes {
            if !instance.request().contains_node(id) || i == 0 || i > formula.formula().num_clauses() {
                return Err(bad(format!("request node `{id}` does not match a clause")));
            }
        }
        if instance.variant() != reg.variant.spec() {
            return Err(bad(format!(
                "registry variant {} differs from instance variant {}",
                reg.variant,
                instance.variant()
            )));
        }
        Ok(GadgetArtifacts {
            instance,
            formula,
            node_registry: reg.substrate_nodes,
            request_registry: reg.request_nodes,
            params: GadgetParams {
                variant: reg.variant,
                lambda: rational(&reg.lambda)?,
                epsilon: rational(&reg.epsilon)?,
                factors,
            },
        })
    }

    fn host_for(&self, clause: usize, assignment: &Assignment) -> Option<&NodeId> {
        self.node_registry.iter().find_map(|(id, la)| {
            (la.clause == clause && la.values.iter().all(|(v, b)| assignment.get(*v) == Some(*b)))
                .then_some(id)
        })
    }
}

fn check_epsilon(eps: Rational) -> Result<(), ReductionError> {
    if eps <= Rational::zero() || eps >= Rational::one() {
        return Err(ReductionError::Epsilon(format_rational(&eps)));
    }
    Ok(())
}

/// Builds the gadget for `variant`. The formula is normalized first; a
/// formula that splits into variable-disjoint parts is rejected.
pub fn instantiate_gadget(
    formula: &CnfFormula,
    variant: GadgetVariant,
    options: GadgetOptions,
) -> Result<GadgetArtifacts, ReductionError> {
    let ordered = match normalize(formula) {
        Normalized::Ordered(o) => o,
        Normalized::Decomposed(parts) => return Err(ReductionError::Decomposed(parts.len())),
    };
    let m = ordered.formula().num_clauses().max(1) as i64;
    let one = Rational::one();
    let two = Rational::from_integer(2);

    let mut epsilon = None;
    let mut factors = None;
    let mut lambda_bound = Rational::new(1, m);
    let mut lambda = Rational::new(1, 2 * m);
    match options.approx {
        Some(GadgetApprox::AlphaEps(eps)) => {
            if !matches!(variant, GadgetVariant::VeNone | GadgetVariant::VR) {
                return Err(ReductionError::ApproxVariant { approx: "alpha", variant });
            }
            check_epsilon(eps)?;
            epsilon = Some(eps);
            lambda_bound = eps / Rational::from_integer(2 * m);
            lambda = eps / Rational::from_integer(4 * m);
            factors = Some(ApproxFactors::new(two - eps, one, one)?);
        }
        Some(GadgetApprox::Gamma(eps)) => {
            if variant != GadgetVariant::NoneNL {
                return Err(ReductionError::ApproxVariant { approx: "gamma", variant });
            }
            check_epsilon(eps)?;
            epsilon = Some(eps);
            factors = Some(ApproxFactors::new(one, one, two - eps)?);
        }
        None => {}
    }
    if let Some(l) = options.lambda {
        if l <= Rational::zero() || l >= lambda_bound {
            return Err(ReductionError::Lambda {
                lambda: format_rational(&l),
                bound: format_rational(&lambda_bound),
            });
        }
        lambda = l;
    }
    let uses_lambda = variant.node_capacities() || variant.edge_capacities();

    let (s_skel, node_registry) = build_substrate(&ordered);
    let (r_skel, request_registry) = build_request(&ordered);
    let big_m = Rational::from_integer(ordered.formula().num_clauses() as i64);
    let node_weight = |i: usize| one + lambda * (big_m - Rational::from_integer(i as i64));
    let edge_weight = |j: usize| one + lambda * Rational::from_integer(j as i64);
    let group = |u: &NodeId| node_registry[u].clause;

    let mut substrate = SubstrateGraph::new();
    for u in s_skel.nodes() {
        let cap = if variant.node_capacities() {
            Quantity::Finite(node_weight(group(u)))
        } else {
            Quantity::Infinite
        };
        substrate.add_node(u.clone(), cap)?;
    }
    for (u, v) in s_skel.edges() {
        let cap = if variant.edge_capacities() {
            Quantity::Finite(edge_weight(group(v)))
        } else {
            Quantity::Infinite
        };
        let latency = if variant == GadgetVariant::NoneNL { one } else { Rational::zero() };
        substrate.add_edge(u.clone(), v.clone(), cap, latency)?;
    }

    let mut request = RequestGraph::new();
    for id in r_skel.nodes() {
        let i = request_registry[id];
        let demand = if variant.node_capacities() { node_weight(i) } else { Rational::zero() };
        request.add_node(id.clone(), demand)?;
        if variant.pins_nodes() {
            for u in substrate.nodes().filter(|u| group(u) != i) {
                request.forbid_node(id, u.clone())?;
            }
        }
    }
    for (vi, vj) in r_skel.edges() {
        let (i, j) = (request_registry[vi], request_registry[vj]);
        let demand = if variant.edge_capacities() { edge_weight(j) } else { Rational::zero() };
        let bound = if variant == GadgetVariant::NoneNL {
            Quantity::Finite(one)
        } else {
            Quantity::Infinite
        };
        request.add_edge(vi.clone(), vj.clone(), demand, bound)?;
        if variant.pins_edges() {
            let key = (vi.clone(), vj.clone());
            let outside: Vec<_> = substrate
                .edges()
                .filter(|(u, v)| group(u) != i || group(v) != j)
                .cloned()
                .collect();
            for se in outside {
                request.forbid_edge(&key, se)?;
            }
        }
    }

    let instance = VnepInstance::new(substrate, request, variant.spec())?;
    Ok(GadgetArtifacts {
        instance,
        formula: ordered,
        node_registry,
        request_registry,
        params: GadgetParams {
            variant,
            lambda: uses_lambda.then_some(lambda),
            epsilon,
            factors,
        },
    })
}

/// Maps each `v{i}` to the local assignment of clause `i` agreeing with
/// `assignment` and each request edge to the single substrate edge joining
/// the two hosts.
pub fn encode_assignment(g: &GadgetArtifacts, assignment: &Assignment) -> Result<Mapping, ReductionError> {
    if !evaluate(g.formula.formula(), assignment)? {
        return Err(ReductionError::Unsatisfying);
    }
    let mut m = Mapping::new();
    for (vi, &i) in &g.request_registry {
        let host = g
            .host_for(i, assignment)
            .expect("a satisfying assignment restricts to a local satisfying assignment");
        m.map_node(vi.clone(), host.clone());
    }
    for e in g.instance.request().edges() {
        let hop = (m.node_map[&e.0].clone(), m.node_map[&e.1].clone());
        assert!(
            g.instance.substrate().contains_edge(&hop),
            "agreeing local assignments are always joined by an edge"
        );
        m.map_edge(e.clone(), vec![hop]);
    }
    Ok(m)
}

/// Reads an assignment off a mapping that places every `v{i}` in its own
/// clause group and routes every request edge over one substrate edge.
/// Variables never constrained default to false.
pub fn decode_mapping(g: &GadgetArtifacts, m: &Mapping) -> Result<Assignment, ReductionError> {
    let bad = |msg: String| ReductionError::NotBaseMapping(msg);
    let mut hosts: BTreeMap<usize, &LocalAssignment> = BTreeMap::new();
    for (vi, &i) in &g.request_registry {
        let u = m.node_map.get(vi).ok_or_else(|| bad(format!("`{vi}` is unmapped")))?;
        let la = g
            .node_registry
            .get(u)
            .ok_or_else(|| bad(format!("`{vi}` is mapped to unknown node `{u}`")))?;
        if la.clause != i {
            return Err(bad(format!("`{vi}` is mapped outside its clause group")));
        }
        hosts.insert(i, la);
    }
    for e in g.instance.request().edges() {
        let path = m
            .edge_map
            .get(e)
            .ok_or_else(|| bad(format!("edge ({}, {}) is unmapped", e.0, e.1)))?;
        let direct = (m.node_map[&e.0].clone(), m.node_map[&e.1].clone());
        if path.len() != 1 || path[0] != direct || !g.instance.substrate().contains_edge(&direct) {
            return Err(bad(format!(
                "edge ({}, {}) is not routed over a single substrate edge",
                e.0, e.1
            )));
        }
    }
    let mut assignment = Assignment::new();
    for la in hosts.values() {
        for (&v, &b) in &la.values {
            match assignment.get(v) {
                Some(prev) => assert_eq!(prev, b, "contradictory value for x{v} in a base mapping"),
                None => assignment.set(v, b),
            }
        }
    }
    for v in 1..=g.formula.formula().num_vars() {
        if assignment.get(v).is_none() {
            assignment.set(v, false);
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::validate::is_feasible;

    fn three_clauses() -> CnfFormula {
        CnfFormula::from_clauses(&[&[1, 2, 3], &[-1, 2, 4], &[2, -3, 4]]).unwrap()
    }

    #[test]
    fn ve_capacities_follow_clause_index() {
        let g = instantiate_gadget(&three_clauses(), GadgetVariant::VeNone, GadgetOptions::default()).unwrap();
        assert_eq!(g.params.lambda, Some(rat(1, 6)));
        let s = g.instance.substrate();
        assert_eq!(s.node_capacity(&"a1_1".into()), Some(Quantity::Finite(rat(8, 6))));
        assert_eq!(s.node_capacity(&"a2_1".into()), Some(Quantity::Finite(rat(7, 6))));
        assert_eq!(s.node_capacity(&"a3_1".into()), Some(Quantity::Finite(rat(1, 1))));
        for e in s.edges() {
            let j = g.node_registry[&e.1].clause as i64;
            assert_eq!(s.edge_capacity(e), Some(Quantity::Finite(rat(6 + j, 6))));
        }
        let r = g.instance.request();
        assert_eq!(r.node(&"v1".into()).unwrap().demand, rat(8, 6));
        assert_eq!(r.edge(&("v1".into(), "v3".into())).unwrap().demand, rat(9, 6));
    }

    #[test]
    fn alpha_eps_lambda() {
        let opts = GadgetOptions {
            approx: Some(GadgetApprox::AlphaEps(rat(1, 10))),
            lambda: None,
        };
        let g = instantiate_gadget(&three_clauses(), GadgetVariant::VeNone, opts).unwrap();
        assert_eq!(g.params.lambda, Some(rat(1, 120)));
        let max = g.instance.substrate().nodes().filter_map(|u| g.instance.substrate().node_capacity(u)).max();
        assert_eq!(max, Some(Quantity::Finite(rat(122, 120))));
        assert!(rat(122, 120) < rat(1, 1) + rat(1, 20));
        assert_eq!(g.params.factors.unwrap().alpha(), rat(19, 10));
        assert!(instantiate_gadget(&three_clauses(), GadgetVariant::EN, opts).is_err());
    }

    #[test]
    fn parameter_checks() {
        let gamma = GadgetOptions {
            approx: Some(GadgetApprox::Gamma(rat(1, 10))),
            lambda: None,
        };
        assert!(instantiate_gadget(&three_clauses(), GadgetVariant::NoneNL, gamma).is_ok());
        assert!(instantiate_gadget(&three_clauses(), GadgetVariant::VeNone, gamma).is_err());
        let bad_eps = GadgetOptions {
            approx: Some(GadgetApprox::Gamma(rat(1, 1))),
            lambda: None,
        };
        assert!(matches!(
            instantiate_gadget(&three_clauses(), GadgetVariant::NoneNL, bad_eps),
            Err(ReductionError::Epsilon(_))
        ));
        let big = GadgetOptions {
            approx: None,
            lambda: Some(rat(1, 3)),
        };
        assert!(matches!(
            instantiate_gadget(&three_clauses(), GadgetVariant::VeNone, big),
            Err(ReductionError::Lambda { .. })
        ));
        let split = CnfFormula::from_clauses(&[&[1, 2], &[3, 4]]).unwrap();
        assert_eq!(
            instantiate_gadget(&split, GadgetVariant::VeNone, GadgetOptions::default()),
            Err(ReductionError::Decomposed(2))
        );
    }

    #[test]
    fn encode_decode_round_trip() {
        let alpha = Assignment::from_values(&[true, true, false, false]);
        for variant in GadgetVariant::ALL {
            let g = instantiate_gadget(&three_clauses(), variant, GadgetOptions::default()).unwrap();
            let m = encode_assignment(&g, &alpha).unwrap();
            assert!(m.edge_map.values().all(|p| p.len() == 1));
            assert!(is_feasible(&g.instance, &m).unwrap().is_ok(), "{variant}");
            assert_eq!(decode_mapping(&g, &m).unwrap(), alpha);
        }
    }

    #[test]
    fn unsatisfying_assignment_is_rejected() {
        let g = instantiate_gadget(&three_clauses(), GadgetVariant::VeNone, GadgetOptions::default()).unwrap();
        let falsifier = Assignment::from_values(&[false, false, false, false]);
        assert_eq!(encode_assignment(&g, &falsifier), Err(ReductionError::Unsatisfying));
    }

    #[test]
    fn registry_round_trip() {
        let opts = GadgetOptions {
            approx: Some(GadgetApprox::AlphaEps(rat(1, 10))),
            lambda: None,
        };
        let g = instantiate_gadget(&three_clauses(), GadgetVariant::VR, opts).unwrap();
        let back = GadgetArtifacts::from_registry(g.instance.clone(), &g.registry_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn variant_names() {
        for v in GadgetVariant::ALL {
            assert_eq!(v.short_name().parse::<GadgetVariant>().unwrap(), v);
            assert_eq!(v.to_string().parse::<GadgetVariant>().unwrap(), v);
        }
        assert_eq!(GadgetVariant::NoneNL.to_string(), "-|NL");
    }
}

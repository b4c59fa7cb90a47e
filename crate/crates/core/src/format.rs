//! JSON instance and mapping documents (`format_version` 1).
//!
//! Rationals are written as integers or `"p/q"` strings, infinity as
//! `"inf"`, edges as two-element arrays of node ids. Mapping edge keys use
//! the `"i->j"` form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Edge, Mapping, ModelError, NodeId, RequestGraph, SubstrateGraph, VariantSpec, VnepInstance};
use crate::rational::{serde_rational, Quantity, Rational};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("edge key `{0}` does not name a request edge")]
    EdgeKey(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstrateNodeDoc {
    id: NodeId,
    capacity: Quantity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstrateEdgeDoc {
    edge: Edge,
    capacity: Quantity,
    #[serde(with = "serde_rational", default = "zero")]
    latency: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstrateDoc {
    nodes: Vec<SubstrateNodeDoc>,
    edges: Vec<SubstrateEdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestNodeDoc {
    id: NodeId,
    #[serde(with = "serde_rational")]
    demand: Rational,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    forbidden: Vec<NodeId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestEdgeDoc {
    edge: Edge,
    #[serde(with = "serde_rational")]
    demand: Rational,
    #[serde(default = "infinite")]
    latency_bound: Quantity,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    forbidden: Vec<Edge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestDoc {
    nodes: Vec<RequestNodeDoc>,
    edges: Vec<RequestEdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format_version: u32,
    substrate: SubstrateDoc,
    request: RequestDoc,
    variant: VariantSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingDoc {
    format_version: u32,
    node_map: BTreeMap<NodeId, NodeId>,
    edge_map: BTreeMap<String, Vec<Edge>>,
}

fn zero() -> Rational {
    Rational::from_integer(0)
}

fn infinite() -> Quantity {
    Quantity::Infinite
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v != FORMAT_VERSION {
        return Err(FormatError::Version(v));
    }
    Ok(())
}

pub fn instance_to_value(instance: &VnepInstance) -> serde_json::Value {
    let s = instance.substrate();
    let r = instance.request();
    let doc = InstanceDoc {
        format_version: FORMAT_VERSION,
        substrate: SubstrateDoc {
            nodes: s
                .nodes
                .iter()
                .map(|(id, cap)| SubstrateNodeDoc {
                    id: id.clone(),
                    capacity: *cap,
                })
                .collect(),
            edges: s
                .edges
                .iter()
                .map(|(e, d)| SubstrateEdgeDoc {
                    edge: e.clone(),
                    capacity: d.capacity,
                    latency: d.latency,
                })
                .collect(),
        },
        request: RequestDoc {
            nodes: r
                .nodes
                .iter()
                .map(|(id, n)| RequestNodeDoc {
                    id: id.clone(),
                    demand: n.demand,
                    forbidden: n.forbidden.iter().cloned().collect(),
                })
                .collect(),
            edges: r
                .edges
                .iter()
                .map(|(e, d)| RequestEdgeDoc {
                    edge: e.clone(),
                    demand: d.demand,
                    latency_bound: d.latency_bound,
                    forbidden: d.forbidden.iter().cloned().collect(),
                })
                .collect(),
        },
        variant: instance.variant(),
    };
    serde_json::to_value(doc).expect("instance documents always serialize")
}

pub fn instance_to_json(instance: &VnepInstance) -> String {
    serde_json::to_string_pretty(&instance_to_value(instance)).expect("serializable")
}

pub fn instance_from_json(text: &str) -> Result<VnepInstance, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    check_version(doc.format_version)?;
    let mut substrate = SubstrateGraph::new();
    for n in doc.substrate.nodes {
        substrate.add_node(n.id, n.capacity)?;
    }
    for e in doc.substrate.edges {
        substrate.add_edge(e.edge.0, e.edge.1, e.capacity, e.latency)?;
    }
    let mut request = RequestGraph::new();
    for n in &doc.request.nodes {
        request.add_node(n.id.clone(), n.demand)?;
    }
    for n in doc.request.nodes {
        for u in n.forbidden {
            request.forbid_node(&n.id, u)?;
        }
    }
    for e in doc.request.edges {
        let key = e.edge.clone();
        request.add_edge(e.edge.0, e.edge.1, e.demand, e.latency_bound)?;
        for se in e.forbidden {
            request.forbid_edge(&key, se)?;
        }
    }
    Ok(VnepInstance::new(substrate, request, doc.variant)?)
}

/// Key of a request edge in the mapping document.
pub fn edge_key(e: &Edge) -> String {
    format!("{}->{}", e.0, e.1)
}

pub fn mapping_to_value(m: &Mapping) -> serde_json::Value {
    let doc = MappingDoc {
        format_version: FORMAT_VERSION,
        node_map: m.node_map.clone(),
        edge_map: m
            .edge_map
            .iter()
            .map(|(e, p)| (edge_key(e), p.clone()))
            .collect(),
    };
    serde_json::to_value(doc).expect("mapping documents always serialize")
}

pub fn mapping_to_json(m: &Mapping) -> String {
    serde_json::to_string_pretty(&mapping_to_value(m)).expect("serializable")
}

/// Parses a mapping. `"i->j"` keys are resolved against the request's edges so
/// that node ids containing `->` remain unambiguous.
pub fn mapping_from_json(text: &str, request: &RequestGraph) -> Result<Mapping, FormatError> {
    let doc: MappingDoc = serde_json::from_str(text)?;
    check_version(doc.format_version)?;
    let mut m = Mapping::new();
    m.node_map = doc.node_map;
    for (key, path) in doc.edge_map {
        let e = resolve_edge_key(&key, request).ok_or_else(|| FormatError::EdgeKey(key.clone()))?;
        m.edge_map.insert(e, path);
    }
    Ok(m)
}

fn resolve_edge_key(key: &str, request: &RequestGraph) -> Option<Edge> {
    key.match_indices("->").find_map(|(pos, _)| {
        let e = (
            NodeId::from(&key[..pos]),
            NodeId::from(&key[pos + 2..]),
        );
        request.edge(&e).map(|_| e)
    })
}

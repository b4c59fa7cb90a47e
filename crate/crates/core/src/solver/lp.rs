//! Integer program for the decision variant in CPLEX LP format.
//!
//! Variables: `x` (the request is embedded), `y_{i}__{u}` (request node `i`
//! on substrate node `u`) and `z_{i}_{j}__{u}_{v}` (request edge `(i, j)`
//! routed over `(u, v)`). Ids are percent-encoded, so `_` only ever appears
//! as a separator.

use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::model::{Edge, NodeId, VnepInstance};
use crate::rational::{format_decimal, Quantity, Rational};
use crate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintFamily {
    /// Every request node is placed exactly when `x = 1`.
    Placement,
    /// Forbidden or unsuitable hosts carry no node.
    NodeFilter,
    /// Flow conservation per request edge and substrate node.
    Flow,
    /// Forbidden or unsuitable substrate edges carry no flow.
    EdgeFilter,
    NodeCapacity,
    EdgeCapacity,
    /// Only present when latency restrictions are enforced.
    Latency,
}

impl ConstraintFamily {
    fn prefix(self) -> &'static str {
        match self {
            ConstraintFamily::Placement => "place",
            ConstraintFamily::NodeFilter => "nfilter",
            ConstraintFamily::Flow => "flow",
            ConstraintFamily::EdgeFilter => "efilter",
            ConstraintFamily::NodeCapacity => "ncap",
            ConstraintFamily::EdgeCapacity => "ecap",
            ConstraintFamily::Latency => "lat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpRow {
    pub name: String,
    pub family: ConstraintFamily,
    /// Nonzero coefficients in emission order.
    pub terms: Vec<(Rational, String)>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpModel {
    pub variables: Vec<String>,
    pub rows: Vec<IpRow>,
}

impl IpModel {
    pub fn rows_of(&self, family: ConstraintFamily) -> impl Iterator<Item = &IpRow> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ VNEP decision model\n");
        out.push_str("Maximize\n obj: x\nSubject To\n");
        let mut latency_marked = false;
        for row in &self.rows {
            if row.family == ConstraintFamily::Latency && !latency_marked {
                out.push_str("\\ (*) latency rows, emitted only when latency restrictions apply\n");
                latency_marked = true;
            }
            write_row(&mut out, row);
        }
        out.push_str("Binary\n");
        for chunk in self.variables.chunks(8) {
            out.push(' ');
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }
}

fn write_row(out: &mut String, row: &IpRow) {
    // Decimals when every number terminates, otherwise clear denominators.
    let numbers = row.terms.iter().map(|(c, _)| c).chain(std::iter::once(&row.rhs));
    let exact = numbers.clone().all(|v| format_decimal(v).is_some());
    let scale = if exact {
        Rational::one()
    } else {
        Rational::from_integer(numbers.fold(1i64, |acc, v| acc.lcm(v.denom())))
    };
    let render = |v: Rational| format_decimal(&(v * scale)).expect("scaled to an integer");

    let _ = write!(out, " {}:", row.name);
    for (k, (coef, var)) in row.terms.iter().enumerate() {
        if k > 0 && k % 6 == 0 {
            out.push_str("\n   ");
        }
        let sign = if coef.is_negative() { '-' } else { '+' };
        let magnitude = coef.abs() * scale;
        if magnitude.is_one() {
            let _ = write!(out, " {sign} {var}");
        } else {
            let _ = write!(out, " {sign} {} {var}", render(coef.abs()));
        }
    }
    let sense = match row.sense {
        Sense::Eq => "=",
        Sense::Le => "<=",
    };
    let _ = writeln!(out, " {sense} {}", render(row.rhs));
}

/// Percent-encodes every byte outside `[A-Za-z0-9]`.
pub(crate) fn encode_id(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn y(i: &NodeId, u: &NodeId) -> String {
    format!("y_{}__{}", encode_id(i.as_str()), encode_id(u.as_str()))
}

fn z(ij: &Edge, uv: &Edge) -> String {
    format!(
        "z_{}_{}__{}_{}",
        encode_id(ij.0.as_str()),
        encode_id(ij.1.as_str()),
        encode_id(uv.0.as_str()),
        encode_id(uv.1.as_str())
    )
}

fn edge_tag(e: &Edge) -> String {
    format!("{}_{}", encode_id(e.0.as_str()), encode_id(e.1.as_str()))
}

/// Builds the model. Rows whose coefficients are all zero are dropped.
pub fn build_ip(instance: &VnepInstance) -> IpModel {
    let substrate = instance.substrate();
    let request = instance.request();
    let variant = instance.variant();
    let one = Rational::one();

    let mut variables = vec!["x".to_string()];
    for i in request.nodes() {
        for u in substrate.nodes() {
            variables.push(y(i, u));
        }
    }
    for ij in request.edges() {
        for uv in substrate.edges() {
            variables.push(z(ij, uv));
        }
    }

    let mut rows = Vec::new();
    let mut push = |family: ConstraintFamily, tag: String, terms: Vec<(Rational, String)>, sense, rhs| {
        if terms.is_empty() {
            return;
        }
        rows.push(IpRow {
            name: format!("{}_{}", family.prefix(), tag),
            family,
            terms,
            sense,
            rhs,
        });
    };

    for i in request.nodes() {
        let mut terms: Vec<_> = substrate.nodes().map(|u| (one, y(i, u))).collect();
        terms.push((-one, "x".to_string()));
        push(ConstraintFamily::Placement, encode_id(i.as_str()), terms, Sense::Eq, Rational::zero());
    }

    for i in request.nodes() {
        let allowed = validate::allowed_nodes(instance, i).expect("request node");
        let terms: Vec<_> = substrate
            .nodes()
            .filter(|u| !allowed.contains(*u))
            .map(|u| (one, y(i, u)))
            .collect();
        push(ConstraintFamily::NodeFilter, encode_id(i.as_str()), terms, Sense::Eq, Rational::zero());
    }

    for ij in request.edges() {
        for u in substrate.nodes() {
            let mut terms = Vec::new();
            for uv in substrate.edges() {
                if &uv.0 == u {
                    terms.push((one, z(ij, uv)));
                } else if &uv.1 == u {
                    terms.push((-one, z(ij, uv)));
                }
            }
            terms.push((-one, y(&ij.0, u)));
            terms.push((one, y(&ij.1, u)));
            let tag = format!("{}__{}", edge_tag(ij), encode_id(u.as_str()));
            push(ConstraintFamily::Flow, tag, terms, Sense::Eq, Rational::zero());
        }
    }

    for ij in request.edges() {
        let allowed = validate::allowed_edges(instance, ij).expect("request edge");
        let terms: Vec<_> = substrate
            .edges()
            .filter(|uv| !allowed.contains(*uv))
            .map(|uv| (one, z(ij, uv)))
            .collect();
        push(ConstraintFamily::EdgeFilter, edge_tag(ij), terms, Sense::Eq, Rational::zero());
    }

    if variant.node_capacities {
        for u in substrate.nodes() {
            let Quantity::Finite(cap) = substrate.node_capacity(u).expect("node") else {
                continue;
            };
            let terms: Vec<_> = request
                .nodes()
                .map(|i| (request.node(i).expect("node").demand, y(i, u)))
                .filter(|(d, _)| !d.is_zero())
                .collect();
            push(ConstraintFamily::NodeCapacity, encode_id(u.as_str()), terms, Sense::Le, cap);
        }
    }

    if variant.edge_capacities {
        for uv in substrate.edges() {
            let Quantity::Finite(cap) = substrate.edge_capacity(uv).expect("edge") else {
                continue;
            };
            let terms: Vec<_> = request
                .edges()
                .map(|ij| (request.edge(ij).expect("edge").demand, z(ij, uv)))
                .filter(|(d, _)| !d.is_zero())
                .collect();
            push(ConstraintFamily::EdgeCapacity, edge_tag(uv), terms, Sense::Le, cap);
        }
    }

    if variant.latency {
        for ij in request.edges() {
            let Quantity::Finite(bound) = request.edge(ij).expect("edge").latency_bound else {
                continue;
            };
            let terms: Vec<_> = substrate
                .edges()
                .map(|uv| (substrate.edge_latency(uv).expect("edge"), z(ij, uv)))
                .filter(|(l, _)| !l.is_zero())
                .collect();
            push(ConstraintFamily::Latency, edge_tag(ij), terms, Sense::Le, bound);
        }
    }

    IpModel { variables, rows }
}

/// LP-format text of [`build_ip`].
pub fn emit_ip(instance: &VnepInstance) -> String {
    build_ip(instance).to_lp()
}

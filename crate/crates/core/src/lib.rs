//! Virtual network embedding toolkit.
//!
//! * [`model`] and [`validate`]: instances, the variant taxonomy, mappings and
//!   the validity / feasibility / approximate-feasibility checks.
//! * [`solver`]: an exact backtracking decision procedure and an LP-format
//!   integer program emitter.
//! * [`reductions`]: 3-SAT gadgets for every variant, the assignment
//!   encoder/decoder, edge-disjoint-paths reductions and formula-graph
//!   structure checks.
//! * [`sat`] and [`cnf`]: DIMACS I/O and a brute-force satisfiability oracle.
//! * [`crosscheck`]: compares the oracle with the solver on generated gadgets.

pub mod cnf;
pub mod crosscheck;
pub mod format;
pub mod model;
pub mod rational;
pub mod reductions;
pub mod sat;
pub mod solver;
pub mod validate;

pub use cnf::{Clause, CnfError, CnfFormula, Literal};
pub use model::{
    edge, Allocations, Edge, Mapping, ModelError, NodeId, RequestGraph, SubstrateGraph,
    VariantSpec, VnepInstance,
};
pub use rational::{int, rat, Quantity, Rational};
pub use sat::{Assignment, SatResult};
pub use solver::{solve_decision, verify_certificate, SolveLimits, SolveResult, SolveStatus};
pub use validate::{
    allocations, allowed_edges, allowed_nodes, is_approx_feasible, is_feasible, is_valid,
    relax_variant, ApproxFactors, Report, Violation,
};

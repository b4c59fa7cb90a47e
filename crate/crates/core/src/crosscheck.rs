//! Decides satisfiability through the gadgets and compares the answers with
//! the brute-force oracle.

use serde::Serialize;

use crate::cnf::CnfFormula;
use crate::reductions::{
    decode_mapping, instantiate_gadget, normalize, GadgetOptions, GadgetVariant, Normalized,
    ReductionError,
};
use crate::sat::{evaluate, random_formula, sat_oracle, Assignment, SatError, SatResult};
use crate::solver::{solve_decision, SolveLimits, SolveStats, SolveStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GadgetVerdict {
    /// Feasible; the decoded assignment is attached.
    Satisfiable(Assignment),
    Unsatisfiable,
    /// The solver hit its limits on some part.
    Unknown,
}

impl GadgetVerdict {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            GadgetVerdict::Satisfiable(_) => Some(true),
            GadgetVerdict::Unsatisfiable => Some(false),
            GadgetVerdict::Unknown => None,
        }
    }
}

/// Summed solver statistics over all parts of a decomposed formula.
fn add_stats(total: &mut SolveStats, s: &SolveStats) {
    total.nodes_explored += s.nodes_explored;
    total.paths_enumerated += s.paths_enumerated;
    total.wall_time += s.wall_time;
}

/// Builds the gadget for every variable-disjoint part of `formula`, solves it
/// (at the gadget's approximation factors, if any) and decodes the mappings.
/// The formula is satisfiable iff every part is.
pub fn decide_via_gadget(
    formula: &CnfFormula,
    variant: GadgetVariant,
    options: GadgetOptions,
    limits: SolveLimits,
) -> Result<(GadgetVerdict, SolveStats), ReductionError> {
    let parts = match normalize(formula) {
        Normalized::Ordered(o) => vec![o],
        Normalized::Decomposed(parts) => parts,
    };
    let mut stats = SolveStats::default();
    let mut combined = Assignment::new();
    let mut unknown = false;
    for part in parts {
        let g = instantiate_gadget(part.formula(), variant, options)?;
        let result = solve_decision(&g.instance, g.params.factors.as_ref(), limits);
        add_stats(&mut stats, &result.stats);
        match result.status {
            SolveStatus::Feasible(m) => {
                let decoded = decode_mapping(&g, &m)?;
                for v in part.formula().occurring_vars() {
                    combined.set(v, decoded.get(v).expect("decoded assignments are total"));
                }
            }
            SolveStatus::Infeasible => return Ok((GadgetVerdict::Unsatisfiable, stats)),
            SolveStatus::ResourceLimit => unknown = true,
        }
    }
    if unknown {
        return Ok((GadgetVerdict::Unknown, stats));
    }
    for v in 1..=formula.num_vars() {
        if combined.get(v).is_none() {
            combined.set(v, false);
        }
    }
    Ok((GadgetVerdict::Satisfiable(combined), stats))
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub dimacs: String,
    pub variant: GadgetVariant,
    pub oracle_sat: bool,
    /// `None` when the solver hit its limits.
    pub gadget_sat: Option<bool>,
    /// Whether the decoded assignment satisfies the formula (when feasible).
    pub decoded_satisfies: Option<bool>,
    pub stats: SolveStats,
}

impl CaseReport {
    pub fn agrees(&self) -> bool {
        self.gadget_sat == Some(self.oracle_sat) && self.decoded_satisfies != Some(false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub cases: usize,
    pub agreements: usize,
    pub resource_limits: usize,
    pub disagreements: Vec<CaseReport>,
}

impl CrosscheckReport {
    pub fn ok(&self) -> bool {
        self.disagreements.is_empty() && self.resource_limits == 0
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum CrosscheckError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Checks one formula against every listed variant.
pub fn check_formula(
    index: usize,
    formula: &CnfFormula,
    variants: &[GadgetVariant],
    options: GadgetOptions,
    limits: SolveLimits,
) -> Result<Vec<CaseReport>, CrosscheckError> {
    let oracle_sat = matches!(sat_oracle(formula)?, SatResult::Satisfiable(_));
    let mut out = Vec::with_capacity(variants.len());
    for &variant in variants {
        let (verdict, stats) = decide_via_gadget(formula, variant, options, limits)?;
        let decoded_satisfies = match &verdict {
            GadgetVerdict::Satisfiable(a) => Some(evaluate(formula, a)?),
            _ => None,
        };
        out.push(CaseReport {
            index,
            dimacs: formula.to_dimacs(),
            variant,
            oracle_sat,
            gadget_sat: verdict.as_bool(),
            decoded_satisfies,
            stats,
        });
    }
    Ok(out)
}

/// Runs `check_formula` over a sequence of formulas and collects the
/// disagreements.
pub fn crosscheck<'a>(
    formulas: impl IntoIterator<Item = &'a CnfFormula>,
    variants: &[GadgetVariant],
    options: GadgetOptions,
    limits: SolveLimits,
) -> Result<CrosscheckReport, CrosscheckError> {
    let mut report = CrosscheckReport {
        cases: 0,
        agreements: 0,
        resource_limits: 0,
        disagreements: Vec::new(),
    };
    for (k, phi) in formulas.into_iter().enumerate() {
        for case in check_formula(k, phi, variants, options, limits)? {
            report.cases += 1;
            if case.gadget_sat.is_none() {
                report.resource_limits += 1;
            } else if case.agrees() {
                report.agreements += 1;
            } else {
                log::warn!("disagreement on formula {k} under {}", case.variant);
                report.disagreements.push(case);
            }
        }
    }
    Ok(report)
}

/// `samples` random 3-literal formulas with seeds `seed, seed + 1, ...`.
pub fn random_formulas(num_vars: u32, num_clauses: usize, samples: usize, seed: u64) -> Result<Vec<CnfFormula>, SatError> {
    (0..samples as u64)
        .map(|k| random_formula(num_vars, num_clauses, seed.wrapping_add(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposed_formula_is_decided_per_part() {
        let sat = CnfFormula::from_clauses(&[&[1, 2], &[3, -4]]).unwrap();
        let (v, _) = decide_via_gadget(&sat, GadgetVariant::VeNone, GadgetOptions::default(), SolveLimits::default()).unwrap();
        let GadgetVerdict::Satisfiable(a) = v else { panic!("{v:?}") };
        assert!(evaluate(&sat, &a).unwrap());

        let unsat = CnfFormula::from_clauses(&[&[1, 2], &[3], &[-3]]).unwrap();
        let (v, _) = decide_via_gadget(&unsat, GadgetVariant::NoneNR, GadgetOptions::default(), SolveLimits::default()).unwrap();
        assert_eq!(v, GadgetVerdict::Unsatisfiable);
    }

    #[test]
    fn small_random_batch_agrees() {
        let formulas = random_formulas(4, 6, 10, 7).unwrap();
        let report = crosscheck(&formulas, &GadgetVariant::ALL, GadgetOptions::default(), SolveLimits::default()).unwrap();
        assert_eq!(report.cases, 50);
        assert!(report.ok(), "{:?}", report.disagreements);
    }
}

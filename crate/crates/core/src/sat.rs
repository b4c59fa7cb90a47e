//! Brute-force satisfiability oracle and assignment utilities.
//!
//! The oracle is a plain truth table over the occurring variables; it shares
//! nothing with the embedding code, which is what makes it usable as an
//! independent check of the gadget constructions.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, CnfFormula};

/// Largest number of occurring variables the oracle will enumerate.
pub const MAX_ORACLE_VARS: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("formula has {0} variables; the oracle enumerates at most {MAX_ORACLE_VARS}")]
    TooManyVariables(usize),
    #[error("assignment has no value for x{0}")]
    PartialAssignment(u32),
    #[error("random 3-literal clauses need at least 3 variables, got {0}")]
    TooFewVariables(u32),
}

/// Truth values keyed by variable index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Assignment(BTreeMap<u32, bool>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// `values[k]` is the value of variable `k + 1`.
    pub fn from_values(values: &[bool]) -> Self {
        Assignment(
            values
                .iter()
                .enumerate()
                .map(|(k, v)| (k as u32 + 1, *v))
                .collect(),
        )
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.0.get(&var).copied()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0.insert(var, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// DIMACS solution line, e.g. `v 1 2 -3 -4 0`.
    pub fn to_dimacs_line(&self) -> String {
        let mut out = String::from("v");
        for (var, value) in self.iter() {
            out.push(' ');
            if !value {
                out.push('-');
            }
            out.push_str(&var.to_string());
        }
        out.push_str(" 0");
        out
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (var, value)) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{var}={}", if value { 'T' } else { 'F' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Satisfiable(Assignment),
    Unsatisfiable,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Satisfiable(_))
    }
}

pub fn clause_satisfied(clause: &Clause, assignment: &Assignment) -> Result<bool, SatError> {
    for l in clause.literals() {
        let v = assignment
            .get(l.var())
            .ok_or(SatError::PartialAssignment(l.var()))?;
        if l.eval(v) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True iff every clause has a literal made true by `assignment`.
pub fn evaluate(formula: &CnfFormula, assignment: &Assignment) -> Result<bool, SatError> {
    for var in formula.occurring_vars() {
        if assignment.get(var).is_none() {
            return Err(SatError::PartialAssignment(var));
        }
    }
    for c in formula.clauses() {
        if !clause_satisfied(c, assignment)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-clause bit masks over the positions of the occurring variables.
struct TruthTable {
    vars: Vec<u32>,
    clauses: Vec<(u32, u32)>,
}

impl TruthTable {
    fn new(formula: &CnfFormula) -> Result<Self, SatError> {
        let vars: Vec<u32> = formula.occurring_vars().into_iter().collect();
        if vars.len() > MAX_ORACLE_VARS {
            return Err(SatError::TooManyVariables(vars.len()));
        }
        let n = vars.len();
        // First variable is the most significant bit of the counter.
        let bit = |var: u32| {
            let pos = vars.binary_search(&var).expect("occurring var");
            1u32 << (n - 1 - pos)
        };
        let clauses = formula
            .clauses()
            .iter()
            .map(|c| {
                c.literals().iter().fold((0, 0), |(pos, neg), l| {
                    if l.is_positive() {
                        (pos | bit(l.var()), neg)
                    } else {
                        (pos, neg | bit(l.var()))
                    }
                })
            })
            .collect();
        Ok(TruthTable { vars, clauses })
    }

    fn satisfies(&self, counter: u32) -> bool {
        self.clauses
            .iter()
            .all(|&(pos, neg)| counter & pos != 0 || !counter & neg != 0)
    }

    fn assignment(&self, counter: u32) -> Assignment {
        let n = self.vars.len();
        let mut a = Assignment::new();
        for (p, var) in self.vars.iter().enumerate() {
            a.set(*var, counter & (1 << (n - 1 - p)) != 0);
        }
        a
    }

    fn size(&self) -> u32 {
        1u32 << self.vars.len()
    }
}

/// Enumerates assignments of the occurring variables in binary counting order
/// (first variable most significant, F before T) and returns the first model.
pub fn sat_oracle(formula: &CnfFormula) -> Result<SatResult, SatError> {
    let table = TruthTable::new(formula)?;
    Ok((0..table.size())
        .find(|&k| table.satisfies(k))
        .map(|k| SatResult::Satisfiable(table.assignment(k)))
        .unwrap_or(SatResult::Unsatisfiable))
}

/// Same table walked from the top; used to cross-check the forward scan.
pub fn sat_oracle_reverse(formula: &CnfFormula) -> Result<SatResult, SatError> {
    let table = TruthTable::new(formula)?;
    Ok((0..table.size())
        .rev()
        .find(|&k| table.satisfies(k))
        .map(|k| SatResult::Satisfiable(table.assignment(k)))
        .unwrap_or(SatResult::Unsatisfiable))
}

/// `num_clauses` clauses of three distinct variables drawn from
/// `1..=num_vars`, signs uniform. Deterministic in `seed`.
pub fn random_formula(num_vars: u32, num_clauses: usize, seed: u64) -> Result<CnfFormula, SatError> {
    if num_vars < 3 {
        return Err(SatError::TooFewVariables(num_vars));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let lits: Vec<i32> = sample(&mut rng, num_vars as usize, 3)
                .into_iter()
                .map(|v| {
                    let var = v as i32 + 1;
                    if rng.gen_bool(0.5) {
                        var
                    } else {
                        -var
                    }
                })
                .collect();
            Clause::new(&lits).expect("distinct variables never form a tautology")
        })
        .collect();
    Ok(CnfFormula::new(num_vars, clauses).expect("variables drawn in range"))
}

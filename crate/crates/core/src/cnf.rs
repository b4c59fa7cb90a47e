//! CNF formulas with at most three literals per clause, and DIMACS I/O.

use std::collections::BTreeSet;
use std::fmt;

use log::warn;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("clause {clause} has {count} distinct literals; at most 3 are supported")]
    TooManyLiterals { clause: usize, count: usize },
    #[error("clause {clause} contains a variable and its negation")]
    Tautology { clause: usize },
    #[error("literal {literal} is outside 1..={num_vars}")]
    LiteralOutOfRange { literal: i32, num_vars: u32 },
    #[error("literal 0 is not allowed inside a clause")]
    ZeroLiteral,
}

/// Signed variable index in DIMACS convention (`-3` is the negation of x3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(i32);

impl Literal {
    pub fn new(value: i32) -> Result<Self, CnfError> {
        if value == 0 {
            return Err(CnfError::ZeroLiteral);
        }
        Ok(Literal(value))
    }

    pub fn var(&self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(&self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(&self, value: bool) -> bool {
        value == self.is_positive()
    }

    pub fn to_dimacs(&self) -> i32 {
        self.0
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "x{}", self.var())
        } else {
            write!(f, "¬x{}", self.var())
        }
    }
}

/// One to three literals over distinct variables, sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Deduplicates repeated literals. `position` is only used for error messages.
    fn build(lits: &[i32], position: usize) -> Result<Self, CnfError> {
        let mut set = BTreeSet::new();
        for &l in lits {
            set.insert(Literal::new(l)?);
        }
        let vars: BTreeSet<u32> = set.iter().map(|l| l.var()).collect();
        if vars.len() != set.len() {
            return Err(CnfError::Tautology { clause: position });
        }
        if set.is_empty() {
            return Err(CnfError::EmptyClause { line: 0 });
        }
        if set.len() > 3 {
            return Err(CnfError::TooManyLiterals {
                clause: position,
                count: set.len(),
            });
        }
        let mut literals: Vec<Literal> = set.into_iter().collect();
        literals.sort_by_key(|l| l.var());
        Ok(Clause { literals })
    }

    pub fn new(lits: &[i32]) -> Result<Self, CnfError> {
        Self::build(lits, 1)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// Variable indices in ascending order.
    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.literals.iter().map(|l| l.var())
    }

    pub fn contains_var(&self, var: u32) -> bool {
        self.literals.iter().any(|l| l.var() == var)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, l) in self.literals.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// Ordered list of clauses over variables `1..=num_vars`. Clause order matters
/// to every gadget construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        for c in &clauses {
            for l in c.literals() {
                if l.var() > num_vars {
                    return Err(CnfError::LiteralOutOfRange {
                        literal: l.to_dimacs(),
                        num_vars,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Builds from DIMACS-style signed integers; `num_vars` is the largest
    /// variable mentioned.
    pub fn from_clauses(clauses: &[&[i32]]) -> Result<Self, CnfError> {
        let built = clauses
            .iter()
            .enumerate()
            .map(|(k, c)| Clause::build(c, k + 1))
            .collect::<Result<Vec<_>, _>>()?;
        let num_vars = built
            .iter()
            .flat_map(|c| c.vars())
            .max()
            .unwrap_or(0);
        CnfFormula::new(num_vars, built)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Variables that occur in at least one clause.
    pub fn occurring_vars(&self) -> BTreeSet<u32> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Same formula with clauses rearranged; `order[k]` is the old position
    /// of the clause placed at position `k`.
    pub fn reordered(&self, order: &[usize]) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: order.iter().map(|&k| self.clauses[k].clone()).collect(),
        }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("⊤");
        }
        for (k, c) in self.clauses.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF. Clause order is preserved, repeated literals are merged,
/// and clauses may span lines. A clause count differing from the header only
/// produces a warning.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut current_start = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(syntax(line_no, "duplicate problem line"));
            }
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(syntax(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| syntax(line_no, "bad variable count"))?;
            let m = parts[3]
                .parse()
                .map_err(|_| syntax(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(syntax(line_no, "clause before problem line"));
        };
        for token in line.split_whitespace() {
            let lit: i32 = token
                .parse()
                .map_err(|_| syntax(line_no, &format!("bad literal `{token}`")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(CnfError::EmptyClause { line: line_no });
                }
                clauses.push(finish_clause(&current, clauses.len() + 1, num_vars)?);
                current.clear();
            } else {
                if current.is_empty() {
                    current_start = line_no;
                }
                current.push(lit);
            }
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(syntax(0, "missing problem line"));
    };
    if !current.is_empty() {
        warn!("clause starting on line {current_start} is not 0-terminated; accepting it");
        clauses.push(finish_clause(&current, clauses.len() + 1, num_vars)?);
    }
    if clauses.len() != declared {
        warn!(
            "header declares {declared} clauses but {} were read",
            clauses.len()
        );
    }
    CnfFormula::new(num_vars, clauses)
}

fn finish_clause(lits: &[i32], position: usize, num_vars: u32) -> Result<Clause, CnfError> {
    if let Some(&bad) = lits.iter().find(|l| l.unsigned_abs() > num_vars) {
        return Err(CnfError::LiteralOutOfRange {
            literal: bad,
            num_vars,
        });
    }
    Clause::build(lits, position)
}

fn syntax(line: usize, message: &str) -> CnfError {
    CnfError::Syntax {
        line,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_clause_example() {
        let phi = parse_dimacs("c example\np cnf 4 3\n1 2 3 0\n-1 2 4 0\n2 -3 4 0\n").unwrap();
        assert_eq!(phi.num_vars(), 4);
        assert_eq!(phi.num_clauses(), 3);
        let c2: Vec<i32> = phi.clauses()[1].literals().iter().map(|l| l.to_dimacs()).collect();
        assert_eq!(c2, vec![-1, 2, 4]);
        assert_eq!(phi.to_string(), "(x1 ∨ x2 ∨ x3) ∧ (¬x1 ∨ x2 ∨ x4) ∧ (x2 ∨ ¬x3 ∨ x4)");
    }

    #[test]
    fn empty_clause_is_an_error() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n0\n"),
            Err(CnfError::EmptyClause { line: 2 })
        );
    }

    #[test]
    fn tautology_is_an_error() {
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 -1 2 0\n"),
            Err(CnfError::Tautology { clause: 1 })
        );
    }

    #[test]
    fn wide_clauses_are_rejected_after_dedup() {
        assert!(matches!(
            parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"),
            Err(CnfError::TooManyLiterals { count: 4, .. })
        ));
        let phi = parse_dimacs("p cnf 3 1\n1 2 2 3 1 0\n").unwrap();
        assert_eq!(phi.clauses()[0].len(), 3);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_dimacs("1 2 0\n"), Err(CnfError::Syntax { .. })));
        assert!(matches!(parse_dimacs("p cnf x 1\n"), Err(CnfError::Syntax { .. })));
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 a 0\n"), Err(CnfError::Syntax { .. })));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 3 0\n"),
            Err(CnfError::LiteralOutOfRange { literal: 3, .. })
        ));
    }

    #[test]
    fn clauses_may_span_lines() {
        let phi = parse_dimacs("p cnf 3 2\n1 2\n3 0 -1\n0\n").unwrap();
        assert_eq!(phi.num_clauses(), 2);
        assert_eq!(phi.clauses()[0].len(), 3);
    }

    #[test]
    fn dimacs_round_trip() {
        let phi = CnfFormula::from_clauses(&[&[1, -2], &[3], &[-1, 2, 3]]).unwrap();
        assert_eq!(parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }
}

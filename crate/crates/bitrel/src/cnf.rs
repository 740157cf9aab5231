//! Propositional formulas in conjunctive normal form.
//!
//! This is the carrier shared by the bit-blaster, the SAT engine and the
//! congruence-violation encoder: variables are dense positive indices handed
//! out by a [`VarAlloc`], literals are signed references to them, and a
//! [`CnfFormula`] is a clause list. DIMACS reading/writing lives here too.

use std::fmt;

use thiserror::Error;

/// A propositional variable. Indices are 1-based (DIMACS convention) and
/// allocated densely by a single [`VarAlloc`] per blast session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropVar(u32);

impl PropVar {
    pub fn new(index: u32) -> PropVar {
        assert!(index > 0, "variable indices are 1-based");
        PropVar(index)
    }

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for PropVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A signed reference to a variable, encoded DIMACS-style as a nonzero i32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(var: PropVar) -> Lit {
        Lit(var.index() as i32)
    }

    pub fn negative(var: PropVar) -> Lit {
        Lit(-(var.index() as i32))
    }

    pub fn new(var: PropVar, positive: bool) -> Lit {
        if positive {
            Lit::positive(var)
        } else {
            Lit::negative(var)
        }
    }

    /// Builds a literal from a nonzero DIMACS integer.
    pub fn from_dimacs(code: i32) -> Lit {
        assert!(code != 0, "literal 0 is the DIMACS clause terminator");
        Lit(code)
    }

    #[inline]
    pub fn var(self) -> PropVar {
        PropVar(self.0.unsigned_abs())
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    #[inline]
    pub fn to_dimacs(self) -> i32 {
        self.0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sequential variable allocator. One allocator drives an entire blast
/// session so that indices are dense, reproducible and never reused.
#[derive(Debug, Clone)]
pub struct VarAlloc {
    next: u32,
}

impl VarAlloc {
    pub fn new() -> VarAlloc {
        VarAlloc { next: 1 }
    }

    /// Resumes allocation after the first `num_vars` indices, for adding
    /// fresh auxiliaries on top of an existing formula.
    pub fn resuming(num_vars: u32) -> VarAlloc {
        VarAlloc { next: num_vars + 1 }
    }

    pub fn fresh(&mut self) -> PropVar {
        let v = PropVar(self.next);
        self.next += 1;
        v
    }

    /// Highest index handed out so far.
    pub fn num_vars(&self) -> u32 {
        self.next - 1
    }
}

impl Default for VarAlloc {
    fn default() -> Self {
        VarAlloc::new()
    }
}

/// A CNF formula. An empty clause list is TRUE; a formula containing an
/// empty clause is FALSE.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    /// The FALSE formula: a single empty clause.
    pub fn contradiction(num_vars: u32) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: vec![Vec::new()],
        }
    }

    pub fn push_clause(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.iter().all(|l| l.var().index() <= self.num_vars));
        self.clauses.push(clause);
    }

    /// Conjunction of two formulas over a shared variable space.
    pub fn conjoin(&self, other: &CnfFormula) -> CnfFormula {
        let mut clauses = self.clauses.clone();
        clauses.extend(other.clauses.iter().cloned());
        CnfFormula {
            num_vars: self.num_vars.max(other.num_vars),
            clauses,
        }
    }

    /// Evaluates the clause set under a total assignment indexed by variable.
    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|lit| {
                let value = assignment[(lit.var().index() - 1) as usize];
                value == lit.is_positive()
            })
        })
    }

    /// Serializes in DIMACS format, with optional `c var <idx> = <name>`
    /// header lines naming selected variables.
    pub fn to_dimacs(&self, names: &[(PropVar, String)]) -> String {
        let mut out = String::new();
        for (var, name) in names {
            out.push_str(&format!("c var {} = {}\n", var.index(), name));
        }
        out.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&format!("{} ", lit.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: variable {var} exceeds declared count {declared}")]
    VarOutOfRange { line: usize, var: u32, declared: u32 },
    #[error("missing `p cnf` header")]
    MissingHeader,
}

/// Parses a DIMACS CNF file: `c` comment lines, a `p cnf <vars> <clauses>`
/// header, then whitespace-separated literals with `0` terminating each
/// clause.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut formula: Option<CnfFormula> = None;
    let mut current: Vec<Lit> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(DimacsError::Malformed {
                    line: line_no,
                    msg: format!("bad problem line `{line}`"),
                });
            }
            let num_vars: u32 = fields[2].parse().map_err(|_| DimacsError::Malformed {
                line: line_no,
                msg: format!("bad variable count `{}`", fields[2]),
            })?;
            let _num_clauses: usize =
                fields[3].parse().map_err(|_| DimacsError::Malformed {
                    line: line_no,
                    msg: format!("bad clause count `{}`", fields[3]),
                })?;
            formula = Some(CnfFormula::new(num_vars));
            continue;
        }
        let formula = formula.as_mut().ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let code: i64 = tok.parse().map_err(|_| DimacsError::Malformed {
                line: line_no,
                msg: format!("bad literal `{tok}`"),
            })?;
            if code == 0 {
                formula.clauses.push(std::mem::take(&mut current));
                continue;
            }
            let var = code.unsigned_abs() as u32;
            if var > formula.num_vars {
                return Err(DimacsError::VarOutOfRange {
                    line: line_no,
                    var,
                    declared: formula.num_vars,
                });
            }
            current.push(Lit::from_dimacs(code as i32));
        }
    }
    let mut formula = formula.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        formula.clauses.push(current);
    }
    Ok(formula)
}

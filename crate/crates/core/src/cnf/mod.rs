//! CNF formulas, partial assignments and three-valued evaluation.
//!
//! Literals are signed integers in the DIMACS convention: the magnitude is
//! the 1-based variable index and a negative sign marks negation. The same
//! representation is used by the SAT-CNF prompt encoding, so a formula can be
//! printed into a prompt, a DIMACS file or a dataset line without conversion.

mod dimacs;

pub use dimacs::{emit_dimacs, parse_dimacs, DimacsError};

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroI32;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 1-based variable index.
pub type Var = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal must be non-zero")]
    ZeroLiteral,
    #[error("formula must have at least one variable")]
    NoVariables,
    #[error("literal {literal} in clause {clause} is out of range for {num_vars} variables")]
    LiteralOutOfRange {
        clause: usize,
        literal: i32,
        num_vars: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Literal(NonZeroI32);

impl Literal {
    pub fn new(value: i32) -> Result<Self, CnfError> {
        NonZeroI32::new(value).map(Literal).ok_or(CnfError::ZeroLiteral)
    }

    pub fn positive(var: Var) -> Self {
        Literal(NonZeroI32::new(var as i32).expect("variable index is 1-based"))
    }

    pub fn negative(var: Var) -> Self {
        Literal(NonZeroI32::new(-(var as i32)).expect("variable index is 1-based"))
    }

    pub fn from_var(var: Var, polarity: bool) -> Self {
        if polarity {
            Self::positive(var)
        } else {
            Self::negative(var)
        }
    }

    pub fn var(self) -> Var {
        self.0.get().unsigned_abs()
    }

    /// True for a non-negated literal.
    pub fn polarity(self) -> bool {
        self.0.get() > 0
    }

    pub fn get(self) -> i32 {
        self.0.get()
    }

    /// Truth value of the literal under a value for its variable.
    pub fn eval(self, value: bool) -> bool {
        value == self.polarity()
    }
}

impl std::ops::Neg for Literal {
    type Output = Literal;

    fn neg(self) -> Literal {
        Literal(-self.0)
    }
}

impl TryFrom<i32> for Literal {
    type Error = CnfError;

    fn try_from(value: i32) -> Result<Self, Self::Error> {
        Literal::new(value)
    }
}

impl From<Literal> for i32 {
    fn from(lit: Literal) -> i32 {
        lit.get()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// Outcome of evaluating a clause or formula under a (possibly partial) assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Satisfied,
    Falsified,
    Undetermined,
}

/// A disjunction of literals.
///
/// Duplicate literals are kept as written; evaluation only looks at whether
/// some literal is true, so a clause behaves as a set.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause(literals)
    }

    pub fn from_ints(values: &[i32]) -> Result<Self, CnfError> {
        values
            .iter()
            .map(|&v| Literal::new(v))
            .collect::<Result<Vec<_>, _>>()
            .map(Clause)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_ints(&self) -> Vec<i32> {
        self.0.iter().map(|l| l.get()).collect()
    }

    /// Literals sorted and deduplicated; two clauses with equal keys are the
    /// same constraint.
    pub fn set_key(&self) -> Vec<Literal> {
        let mut lits = self.0.clone();
        lits.sort_unstable();
        lits.dedup();
        lits
    }

    pub fn evaluate(&self, asg: &Assignment) -> Status {
        evaluate_clause(self, asg)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause(iter.into_iter().collect())
    }
}

/// A conjunction of clauses over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFormula", into = "RawFormula")]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

#[derive(Serialize, Deserialize)]
struct RawFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl TryFrom<RawFormula> for CnfFormula {
    type Error = CnfError;

    fn try_from(raw: RawFormula) -> Result<Self, Self::Error> {
        CnfFormula::new(raw.num_vars, raw.clauses)
    }
}

impl From<CnfFormula> for RawFormula {
    fn from(f: CnfFormula) -> Self {
        RawFormula {
            num_vars: f.num_vars,
            clauses: f.clauses,
        }
    }
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::NoVariables);
        }
        for (i, clause) in clauses.iter().enumerate() {
            if let Some(lit) = clause.literals().iter().find(|l| l.var() > num_vars) {
                return Err(CnfError::LiteralOutOfRange {
                    clause: i,
                    literal: lit.get(),
                    num_vars,
                });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn from_ints(num_vars: u32, clauses: &[Vec<i32>]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::from_ints(c))
            .collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_vars, clauses)
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

    /// Clause density m / n.
    pub fn alpha(&self) -> f64 {
        self.clauses.len() as f64 / self.num_vars as f64
    }

    pub fn to_ints(&self) -> Vec<Vec<i32>> {
        self.clauses.iter().map(Clause::to_ints).collect()
    }

    /// Clause multiset in canonical order, for order-insensitive comparison.
    pub fn clause_set(&self) -> Vec<Vec<Literal>> {
        let mut keys: Vec<_> = self.clauses.iter().map(Clause::set_key).collect();
        keys.sort();
        keys
    }

    pub fn evaluate(&self, asg: &Assignment) -> Status {
        evaluate_formula(self, asg)
    }

    /// Brute-force truth value under a total assignment given as a bit mask
    /// (bit `v - 1` holds variable `v`).
    pub fn eval_mask(&self, mask: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.literals()
                .iter()
                .any(|l| l.eval(mask >> (l.var() - 1) & 1 == 1))
        })
    }
}

/// Partial map from variables to truth values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "Vec<i32>", try_from = "Vec<i32>")]
pub struct Assignment(BTreeMap<Var, bool>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("variable {0} is assigned both values")]
    Conflict(Var),
    #[error("literal must be non-zero")]
    ZeroLiteral,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment from true literals, rejecting a variable that
    /// appears with both signs.
    pub fn from_literals<I: IntoIterator<Item = Literal>>(lits: I) -> Result<Self, AssignmentError> {
        let mut asg = Assignment::new();
        for lit in lits {
            asg.try_set(lit.var(), lit.polarity())?;
        }
        Ok(asg)
    }

    pub fn from_mask(num_vars: u32, mask: u64) -> Self {
        Assignment((1..=num_vars).map(|v| (v, mask >> (v - 1) & 1 == 1)).collect())
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.0.get(&var).copied()
    }

    /// Overwrites any previous value.
    pub fn set(&mut self, var: Var, value: bool) {
        self.0.insert(var, value);
    }

    pub fn try_set(&mut self, var: Var, value: bool) -> Result<(), AssignmentError> {
        match self.0.insert(var, value) {
            Some(prev) if prev != value => Err(AssignmentError::Conflict(var)),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// Largest assigned variable, if any.
    pub fn max_var(&self) -> Option<Var> {
        self.0.keys().next_back().copied()
    }

    pub fn literal_value(&self, lit: Literal) -> Option<bool> {
        self.get(lit.var()).map(|v| lit.eval(v))
    }

    pub fn to_literals(&self) -> Vec<Literal> {
        self.iter().map(|(v, b)| Literal::from_var(v, b)).collect()
    }
}

impl From<Assignment> for Vec<i32> {
    fn from(asg: Assignment) -> Self {
        asg.to_literals().into_iter().map(|l| l.get()).collect()
    }
}

impl TryFrom<Vec<i32>> for Assignment {
    type Error = AssignmentError;

    fn try_from(values: Vec<i32>) -> Result<Self, Self::Error> {
        let lits = values
            .into_iter()
            .map(|v| Literal::new(v).map_err(|_| AssignmentError::ZeroLiteral))
            .collect::<Result<Vec<_>, _>>()?;
        Assignment::from_literals(lits)
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

pub fn evaluate_clause(clause: &Clause, asg: &Assignment) -> Status {
    let mut undetermined = false;
    for &lit in clause.literals() {
        match asg.literal_value(lit) {
            Some(true) => return Status::Satisfied,
            Some(false) => {}
            None => undetermined = true,
        }
    }
    if undetermined {
        Status::Undetermined
    } else {
        Status::Falsified
    }
}

/// Satisfied once every clause is; a single falsified clause falsifies the
/// formula even if others are still open.
pub fn evaluate_formula(formula: &CnfFormula, asg: &Assignment) -> Status {
    let mut undetermined = false;
    for clause in formula.clauses() {
        match evaluate_clause(clause, asg) {
            Status::Falsified => return Status::Falsified,
            Status::Undetermined => undetermined = true,
            Status::Satisfied => {}
        }
    }
    if undetermined {
        Status::Undetermined
    } else {
        Status::Satisfied
    }
}

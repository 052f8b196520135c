//! Backtracking DPLL with unit propagation and pure-literal elimination.
//!
//! This is the reference decision procedure for the whole lab: it labels
//! generated instances, produces witnesses, decides the formulas returned by
//! the translate pipeline, and its decision counter is the hardness observable
//! for the phase-transition profile.
//!
//! Branching picks the unassigned variable occurring most often in the
//! shortest open clauses, tries `true` first and breaks ties by lowest index,
//! so a formula always yields the same search tree and the same counters.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula, Literal, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
}

impl Verdict {
    pub fn is_sat(self) -> bool {
        self == Verdict::Sat
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub decisions: u64,
    pub unit_propagations: u64,
    pub pure_eliminations: u64,
    pub backtracks: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl SolveStats {
    /// The deterministic part of the statistics.
    pub fn counters(&self) -> [u64; 4] {
        [
            self.decisions,
            self.unit_propagations,
            self.pure_eliminations,
            self.backtracks,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Total assignment, present iff SAT.
    pub witness: Option<Assignment>,
    pub stats: SolveStats,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("decision budget exhausted after {} decisions", .0.decisions)]
    BudgetExhausted(SolveStats),
}

/// Solves without a decision budget.
pub fn solve(formula: &CnfFormula) -> SolveResult {
    solve_with_budget(formula, None).expect("unbounded search cannot exhaust its budget")
}

pub fn solve_with_budget(
    formula: &CnfFormula,
    max_decisions: Option<u64>,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let mut search = Search::new(formula, max_decisions);
    let outcome = search.dpll();
    search.stats.wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok(true) => {
            let witness = (1..=formula.num_vars())
                .map(|v| (v, search.values[v as usize].unwrap_or(false)))
                .collect();
            Ok(SolveResult {
                verdict: Verdict::Sat,
                witness: Some(witness),
                stats: search.stats,
            })
        }
        Ok(false) => Ok(SolveResult {
            verdict: Verdict::Unsat,
            witness: None,
            stats: search.stats,
        }),
        Err(Exhausted) => Err(SolveError::BudgetExhausted(search.stats)),
    }
}

struct Exhausted;

enum Propagation {
    Conflict,
    Fixpoint,
}

struct Search<'a> {
    clauses: &'a [crate::cnf::Clause],
    num_vars: usize,
    values: Vec<Option<bool>>,
    trail: Vec<Var>,
    stats: SolveStats,
    budget: Option<u64>,
    // scratch, indexed by variable
    pos_seen: Vec<bool>,
    neg_seen: Vec<bool>,
    score: Vec<u32>,
}

impl<'a> Search<'a> {
    fn new(formula: &'a CnfFormula, budget: Option<u64>) -> Self {
        let n = formula.num_vars() as usize;
        Search {
            clauses: formula.clauses(),
            num_vars: n,
            values: vec![None; n + 1],
            trail: Vec::with_capacity(n),
            stats: SolveStats::default(),
            budget,
            pos_seen: vec![false; n + 1],
            neg_seen: vec![false; n + 1],
            score: vec![0; n + 1],
        }
    }

    fn assign(&mut self, lit: Literal) {
        self.values[lit.var() as usize] = Some(lit.polarity());
        self.trail.push(lit.var());
    }

    fn undo(&mut self, mark: usize) {
        for var in self.trail.drain(mark..) {
            self.values[var as usize] = None;
        }
    }

    fn lit_value(&self, lit: Literal) -> Option<bool> {
        self.values[lit.var() as usize].map(|v| lit.eval(v))
    }

    fn dpll(&mut self) -> Result<bool, Exhausted> {
        let mark = self.trail.len();
        if let Propagation::Conflict = self.propagate() {
            self.undo(mark);
            return Ok(false);
        }
        let Some(var) = self.choose_branch() else {
            return Ok(true);
        };
        let after_propagation = self.trail.len();
        for polarity in [true, false] {
            if self.budget.is_some_and(|b| self.stats.decisions >= b) {
                self.undo(mark);
                return Err(Exhausted);
            }
            self.stats.decisions += 1;
            self.assign(Literal::from_var(var, polarity));
            match self.dpll() {
                Ok(true) => return Ok(true),
                Ok(false) => {
                    self.undo(after_propagation);
                    self.stats.backtracks += 1;
                }
                Err(e) => {
                    self.undo(mark);
                    return Err(e);
                }
            }
        }
        self.undo(mark);
        Ok(false)
    }

    /// Applies unit propagation, then pure-literal elimination, repeating
    /// until neither rule fires.
    fn propagate(&mut self) -> Propagation {
        loop {
            let mut changed = false;
            for ci in 0..self.clauses.len() {
                let mut open = None;
                let mut open_count = 0;
                let mut satisfied = false;
                for &lit in self.clauses[ci].literals() {
                    match self.lit_value(lit) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            if open != Some(lit) {
                                open_count += 1;
                            }
                            open = Some(lit);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match open_count {
                    0 => return Propagation::Conflict,
                    1 => {
                        let lit = open.expect("one open literal");
                        // A repeated literal (x ∨ x) counts once; a clause such as
                        // (x ∨ ¬x) is never unit because both literals are open.
                        if self.lit_value(lit).is_none() {
                            self.assign(lit);
                            self.stats.unit_propagations += 1;
                            changed = true;
                        }
                    }
                    _ => {}
                }
            }
            if changed {
                continue;
            }
            if self.eliminate_pure_literals() {
                continue;
            }
            return Propagation::Fixpoint;
        }
    }

    fn eliminate_pure_literals(&mut self) -> bool {
        self.pos_seen.iter_mut().for_each(|b| *b = false);
        self.neg_seen.iter_mut().for_each(|b| *b = false);
        for clause in self.clauses {
            if clause.literals().iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            for &lit in clause.literals() {
                if self.values[lit.var() as usize].is_none() {
                    if lit.polarity() {
                        self.pos_seen[lit.var() as usize] = true;
                    } else {
                        self.neg_seen[lit.var() as usize] = true;
                    }
                }
            }
        }
        let mut changed = false;
        for var in 1..=self.num_vars {
            let (pos, neg) = (self.pos_seen[var], self.neg_seen[var]);
            if pos != neg {
                self.assign(Literal::from_var(var as Var, pos));
                self.stats.pure_eliminations += 1;
                changed = true;
            }
        }
        changed
    }

    /// Most frequent unassigned variable among the shortest open clauses;
    /// `None` when every clause is satisfied.
    fn choose_branch(&mut self) -> Option<Var> {
        let mut shortest = usize::MAX;
        self.score.iter_mut().for_each(|s| *s = 0);
        for clause in self.clauses {
            if clause.literals().iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            let open = clause
                .literals()
                .iter()
                .filter(|l| self.values[l.var() as usize].is_none())
                .count();
            if open < shortest {
                shortest = open;
                self.score.iter_mut().for_each(|s| *s = 0);
            }
            if open == shortest {
                for &lit in clause.literals() {
                    if self.values[lit.var() as usize].is_none() {
                        self.score[lit.var() as usize] += 1;
                    }
                }
            }
        }
        if shortest == usize::MAX {
            return None;
        }
        let mut best: Option<(u32, usize)> = None;
        for var in 1..=self.num_vars {
            let s = self.score[var];
            if s > 0 && best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, var));
            }
        }
        best.map(|(_, v)| v as Var)
    }
}

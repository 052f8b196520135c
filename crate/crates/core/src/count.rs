//! Exact model counting and satisfiability ratios.
//!
//! Counting DPLL: unit propagation (count-preserving) followed by branching on
//! the lowest unassigned variable of the first open clause. Once every clause
//! is satisfied, the k still-unassigned variables contribute 2ᵏ models.
//! Pure-literal elimination is deliberately absent because it drops models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{CnfFormula, Literal};
use crate::generate::Instance;

pub const DEFAULT_VARIABLE_CEILING: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub model_count: u64,
    pub num_vars: u32,
    /// model_count / 2ⁿ.
    pub sat_ratio: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("{num_vars} variables exceeds the counting ceiling of {ceiling}")]
    TooManyVariables { num_vars: u32, ceiling: u32 },
    #[error("instance {0} has no model count")]
    UncountedInstance(String),
    #[error("bin edges must be at least two strictly increasing positive values")]
    InvalidEdges,
    #[error("instance {id} has satisfiability ratio {ratio} outside the bin range")]
    RatioOutOfRange { id: String, ratio: f64 },
}

pub fn count_models(formula: &CnfFormula) -> Result<CountResult, CountError> {
    count_models_with_ceiling(formula, DEFAULT_VARIABLE_CEILING)
}

pub fn count_models_with_ceiling(
    formula: &CnfFormula,
    ceiling: u32,
) -> Result<CountResult, CountError> {
    let n = formula.num_vars();
    if n > ceiling || n > 62 {
        return Err(CountError::TooManyVariables {
            num_vars: n,
            ceiling: ceiling.min(62),
        });
    }
    let clauses: Vec<Vec<Literal>> = formula.clauses().iter().map(|c| c.set_key()).collect();
    let mut counter = Counter {
        clauses: &clauses,
        values: vec![None; n as usize + 1],
        trail: Vec::new(),
    };
    let model_count = counter.count();
    Ok(CountResult {
        model_count,
        num_vars: n,
        sat_ratio: model_count as f64 / (1u64 << n) as f64,
    })
}

struct Counter<'a> {
    clauses: &'a [Vec<Literal>],
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
}

impl Counter<'_> {
    fn value(&self, lit: Literal) -> Option<bool> {
        self.values[lit.var() as usize].map(|v| lit.eval(v))
    }

    fn undo(&mut self, mark: usize) {
        for var in self.trail.drain(mark..) {
            self.values[var as usize] = None;
        }
    }

    fn count(&mut self) -> u64 {
        let mark = self.trail.len();
        let total = self.count_here();
        self.undo(mark);
        total
    }

    fn count_here(&mut self) -> u64 {
        // Unit propagation to fixpoint; returns 0 on conflict.
        let branch = loop {
            let mut unit = None;
            let mut branch_var = None;
            for clause in self.clauses {
                let mut open = None;
                let mut open_count = 0;
                let mut sat = false;
                for &lit in clause {
                    match self.value(lit) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            open_count += 1;
                            open.get_or_insert(lit);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match open_count {
                    0 => return 0,
                    1 => {
                        unit = open;
                        break;
                    }
                    _ => {
                        if branch_var.is_none() {
                            branch_var = open.map(|l| l.var());
                        }
                    }
                }
            }
            match unit {
                Some(lit) => {
                    self.values[lit.var() as usize] = Some(lit.polarity());
                    self.trail.push(lit.var());
                }
                None => break branch_var,
            }
        };
        let Some(var) = branch else {
            let free = self.values[1..].iter().filter(|v| v.is_none()).count();
            return 1u64 << free;
        };
        let mut total = 0;
        for value in [true, false] {
            let mark = self.trail.len();
            self.values[var as usize] = Some(value);
            self.trail.push(var);
            total += self.count();
            self.undo(mark);
        }
        total
    }
}

/// Attaches model counts to instances in place.
pub fn count_instances(instances: &mut [Instance]) -> Result<(), CountError> {
    use rayon::prelude::*;
    instances.par_iter_mut().try_for_each(|inst| {
        inst.model_count = Some(count_models(&inst.formula)?.model_count);
        Ok(())
    })
}

/// Powers of two from 2^-`depth` to 1, ascending.
pub fn log2_edges(depth: u32) -> Vec<f64> {
    (0..=depth).rev().map(|k| 1.0 / (1u64 << k) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioBin<'a> {
    pub lo: f64,
    pub hi: f64,
    pub members: Vec<&'a Instance>,
}

impl RatioBin<'_> {
    /// Geometric centre of the bin.
    pub fn center(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

/// Groups SAT instances by satisfiability ratio into `[edges[i], edges[i+1])`
/// bins; the last bin also includes its upper edge. UNSAT instances are
/// skipped. Empty bins are kept.
pub fn ratio_bins<'a>(
    instances: &'a [Instance],
    edges: &[f64],
) -> Result<Vec<RatioBin<'a>>, CountError> {
    if edges.len() < 2 || edges[0] <= 0.0 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CountError::InvalidEdges);
    }
    let mut bins: Vec<RatioBin<'a>> = edges
        .windows(2)
        .map(|w| RatioBin {
            lo: w[0],
            hi: w[1],
            members: Vec::new(),
        })
        .collect();
    let last = bins.len() - 1;
    for inst in instances.iter().filter(|i| i.label.is_sat()) {
        let ratio = inst
            .sat_ratio()
            .ok_or_else(|| CountError::UncountedInstance(inst.id.clone()))?;
        let slot = bins
            .iter()
            .position(|b| ratio >= b.lo && ratio < b.hi)
            .or_else(|| (ratio == bins[last].hi).then_some(last))
            .ok_or_else(|| CountError::RatioOutOfRange {
                id: inst.id.clone(),
                ratio,
            })?;
        bins[slot].members.push(inst);
    }
    Ok(bins)
}

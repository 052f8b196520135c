//! Seeded random 3-SAT instances over the reference α grid.
//!
//! Each clause draws 3 distinct variables uniformly from `1..=n` and negates
//! each independently with probability ½. Duplicate clauses within a formula
//! are allowed. Instances are labelled and given a witness by the DPLL solver;
//! model counts are filled separately (see [`crate::count`]).

mod dataset;
mod grid;
mod region;
mod stats;

pub use dataset::{read_dataset, write_dataset, DatasetError, DATASET_SCHEMA_VERSION};
pub use grid::{paper_dataset_grid, paper_grid, paper_grid_row, GridCell};
pub use region::{
    classify_region, estimate_bounds, sat_fraction_by_alpha, AlphaKey, HardBand, Region,
    RegionError, ALPHA_C, MIN_SAMPLES_PER_ALPHA,
};
pub use stats::{DatasetStats, LabelStats};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Clause, CnfFormula, Literal};
use crate::seed;
use crate::solver::{self, Verdict};

pub const CLAUSE_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: u32,
    pub alpha: f64,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
}

impl GenSpec {
    pub fn new(n: u32, alpha: f64, count: usize, seed: u64) -> Self {
        GenSpec { n, alpha, count, seed }
    }

    /// round(α·n), ties to even.
    pub fn num_clauses(&self) -> u32 {
        (self.alpha * f64::from(self.n)).round_ties_even() as u32
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < CLAUSE_WIDTH as u32 {
            return Err(GenError::InvalidSpec(format!(
                "n = {} but 3-clauses need at least 3 variables",
                self.n
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(GenError::InvalidSpec(format!("α = {} is not positive", self.alpha)));
        }
        if self.num_clauses() < 1 {
            return Err(GenError::InvalidSpec(format!(
                "α = {} gives no clauses at n = {}",
                self.alpha, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub formula: CnfFormula,
    pub n: u32,
    pub m: u32,
    /// α as requested by the generating spec.
    pub alpha: f64,
    pub label: Verdict,
    pub model_count: Option<u64>,
    pub region: Region,
    pub seed: u64,
    /// Position within the generating spec's draw sequence.
    pub index: usize,
    pub witness: Option<Assignment>,
}

impl Instance {
    /// Actual clause density m / n.
    pub fn density(&self) -> f64 {
        f64::from(self.m) / f64::from(self.n)
    }

    /// model count / 2ⁿ, when counted.
    pub fn sat_ratio(&self) -> Option<f64> {
        self.model_count
            .map(|c| c as f64 / (1u64 << self.n) as f64)
    }
}

/// Draws the raw formulas of a spec without labelling them.
pub fn sample_formulas(spec: &GenSpec) -> Result<Vec<CnfFormula>, GenError> {
    spec.validate()?;
    let n = spec.n;
    let m = spec.num_clauses();
    let mut rng = seed::rng(spec.seed);
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let clauses = (0..m)
            .map(|_| {
                sample(&mut rng, n as usize, CLAUSE_WIDTH)
                    .into_iter()
                    .map(|i| Literal::from_var(i as u32 + 1, rng.random_bool(0.5)))
                    .collect::<Clause>()
            })
            .collect();
        out.push(CnfFormula::new(n, clauses).expect("sampled literals are in range"));
    }
    Ok(out)
}

/// Generates and labels `spec.count` instances; regions use the default hard band.
pub fn generate(spec: &GenSpec) -> Result<Vec<Instance>, GenError> {
    generate_with_band(spec, HardBand::default())
}

pub fn generate_with_band(spec: &GenSpec, band: HardBand) -> Result<Vec<Instance>, GenError> {
    let formulas = sample_formulas(spec)?;
    Ok(formulas
        .into_iter()
        .enumerate()
        .map(|(index, formula)| label(spec, index, formula, band))
        .collect())
}

fn label(spec: &GenSpec, index: usize, formula: CnfFormula, band: HardBand) -> Instance {
    let result = solver::solve(&formula);
    Instance {
        id: seed::instance_id(spec.seed, spec.n, spec.alpha, index),
        n: spec.n,
        m: formula.num_clauses() as u32,
        alpha: spec.alpha,
        label: result.verdict,
        model_count: None,
        region: band.classify(spec.alpha),
        seed: spec.seed,
        index,
        witness: result.witness,
        formula,
    }
}

/// Per-cell seed derived from a master seed and the cell's (n, m).
pub fn cell_seed(master: u64, cell: &GridCell) -> u64 {
    let m = (cell.alpha * f64::from(cell.n)).round_ties_even() as u64;
    seed::derive_seed(master, "cell", &[u64::from(cell.n), m])
}

/// Generates every cell of a grid in parallel; output order follows the grid.
pub fn generate_grid(
    cells: &[GridCell],
    per_cell: usize,
    master_seed: u64,
    band: HardBand,
) -> Result<Vec<Instance>, GenError> {
    let chunks = cells
        .par_iter()
        .map(|cell| {
            let spec = GenSpec::new(cell.n, cell.alpha, per_cell, cell_seed(master_seed, cell));
            generate_with_band(&spec, band)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

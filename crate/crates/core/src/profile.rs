//! Solver effort and satisfiability across an α grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{cell_seed, sample_formulas, GenError, GenSpec, GridCell};
use crate::solver::solve;

pub const MIN_PER_CELL: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: u32,
    pub alpha: f64,
    pub samples: usize,
    pub mean_decisions: f64,
    /// Seconds per solve.
    pub mean_wall_time: f64,
    pub p_sat: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("{0} instances per cell requested, at least {MIN_PER_CELL} required")]
    TooFewPerCell(usize),
    #[error(transparent)]
    Generation(#[from] GenError),
}

/// One row per grid cell, in grid order. Instances are drawn from
/// `cell_seed(seed, cell)`, so the sample set is fixed by the seed.
pub fn hardness_profile(
    grid: &[GridCell],
    per_cell: usize,
    seed: u64,
) -> Result<Vec<ProfileRow>, ProfileError> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if per_cell < MIN_PER_CELL {
        return Err(ProfileError::TooFewPerCell(per_cell));
    }
    grid.par_iter()
        .map(|cell| {
            let spec = GenSpec::new(cell.n, cell.alpha, per_cell, cell_seed(seed, cell));
            let formulas = sample_formulas(&spec)?;
            let mut decisions = 0u64;
            let mut wall = 0.0;
            let mut sat = 0usize;
            for f in &formulas {
                let r = solve(f);
                decisions += r.stats.decisions;
                wall += r.stats.wall_time;
                sat += usize::from(r.verdict.is_sat());
            }
            let k = formulas.len() as f64;
            Ok(ProfileRow {
                n: cell.n,
                alpha: cell.alpha,
                samples: formulas.len(),
                mean_decisions: decisions as f64 / k,
                mean_wall_time: wall / k,
                p_sat: sat as f64 / k,
            })
        })
        .collect()
}

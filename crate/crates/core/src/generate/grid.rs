use serde::{Deserialize, Serialize};

/// One (n, α) cell of an experiment grid. α is always `m / n` for an integer
/// clause count, so grid values are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: u32,
    pub alpha: f64,
}

impl GridCell {
    pub fn from_clauses(n: u32, m: u32) -> Self {
        GridCell {
            n,
            alpha: f64::from(m) / f64::from(n),
        }
    }
}

/// Clause-count step used on α ∈ [1, 6] for each reference row; above 6 the
/// step is one unit of α.
const ROWS: [(u32, u32); 8] = [(3, 3), (4, 1), (5, 1), (6, 3), (7, 7), (8, 1), (9, 9), (10, 1)];

/// The reference α grid, rows n = 3..=10, verbatim (208 cells).
pub fn paper_grid() -> Vec<GridCell> {
    ROWS.iter()
        .flat_map(|&(n, step)| row(n, step))
        .collect()
}

pub fn paper_grid_row(n: u32) -> Option<Vec<GridCell>> {
    ROWS.iter().find(|(rn, _)| *rn == n).map(|&(n, step)| row(n, step))
}

/// The cells the 60,000-formula reference dataset is drawn from:
/// the grid above without α = 1.0 (200 cells). This is the only selection that
/// matches the reference per-n formula counts and the stated minimum α of
/// 1.1 and minimum clause count of 5.
pub fn paper_dataset_grid() -> Vec<GridCell> {
    paper_grid().into_iter().filter(|c| c.alpha != 1.0).collect()
}

fn row(n: u32, step: u32) -> Vec<GridCell> {
    let fine = (n..=6 * n).step_by(step as usize);
    let coarse = (7..=11).map(|a| a * n);
    fine.chain(coarse).map(|m| GridCell::from_clauses(n, m)).collect()
}

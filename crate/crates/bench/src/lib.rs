//! Shared fixtures for the benchmarks.

use satphase::generate::{generate, GenSpec};
use satphase::Instance;

/// Fixed-seed instances at one (n, α) cell.
pub fn instances(n: u32, alpha: f64, count: usize) -> Vec<Instance> {
    generate(&GenSpec::new(n, alpha, count, 0xbe_c4)).expect("valid spec")
}

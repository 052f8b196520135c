//! Random 3-SAT phase-transition laboratory.
//!
//! Generates random 3-SAT instances across clause densities, decides and
//! counts them with an internal DPLL engine, renders them as language-model
//! prompts (SAT-CNF, SAT-Menu, SAT-Translate), scores model answers and
//! aggregates the results into accuracy, ratio, confusion and token series.

pub mod cnf;
pub mod count;
pub mod encoding;
pub mod eval;
pub mod generate;
pub mod metrics;
pub mod profile;
pub mod seed;
pub mod solver;

pub use cnf::{Assignment, Clause, CnfFormula, Literal, Status};
pub use count::{count_models, CountResult};
pub use encoding::{Format, ParsedAnswer, Rendering, Variant, VocabMapping};
pub use eval::{score, AdapterSpec, EvalRecord, ModelAdapter, Outcome};
pub use generate::{GenSpec, GridCell, HardBand, Instance, Region};
pub use profile::{hardness_profile, ProfileRow};
pub use solver::{solve, SolveResult, SolveStats, Verdict};
pub use metrics::{MetricSeries, Point};

//! Versioned system messages and the curated few-shot pool.

use std::sync::OnceLock;

use serde::Deserialize;

use super::{Format, Variant, VocabMapping};
use crate::cnf::{Assignment, CnfFormula};
use crate::solver::Verdict;

pub const TEMPLATE_VERSION: &str = "v1";

const MENU_SEARCH: &str = include_str!("../../assets/prompts/v1/sat_menu_search.txt");
const MENU_DECISION: &str = include_str!("../../assets/prompts/v1/sat_menu_decision.txt");
const CNF_SEARCH: &str = include_str!("../../assets/prompts/v1/sat_cnf_search.txt");
const CNF_DECISION: &str = include_str!("../../assets/prompts/v1/sat_cnf_decision.txt");
const TRANSLATE: &str = include_str!("../../assets/prompts/v1/sat_translate.txt");
const FEW_SHOT: &str = include_str!("../../assets/fewshot/v1.json");

/// SAT-Translate has a single message regardless of variant.
pub fn system_message(format: Format, variant: Variant) -> &'static str {
    match (format, variant) {
        (Format::SatMenu, Variant::Search) => MENU_SEARCH,
        (Format::SatMenu, Variant::Decision) => MENU_DECISION,
        (Format::SatCnf, Variant::Search) => CNF_SEARCH,
        (Format::SatCnf, Variant::Decision) => CNF_DECISION,
        (Format::SatTranslate, _) => TRANSLATE,
    }
}

/// Which template a system message is; SAT-Translate reports `Search`.
pub fn identify_system_message(text: &str) -> Option<(Format, Variant)> {
    let text = text.trim();
    [
        (Format::SatMenu, Variant::Search),
        (Format::SatMenu, Variant::Decision),
        (Format::SatCnf, Variant::Search),
        (Format::SatCnf, Variant::Decision),
        (Format::SatTranslate, Variant::Search),
    ]
    .into_iter()
    .find(|&(f, v)| system_message(f, v) == text)
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
struct RawExample {
    items: Vec<String>,
    persons: Vec<String>,
    clauses: Vec<Vec<i32>>,
    label: Verdict,
    solution: Vec<i32>,
}

/// A solved problem shown to the model before the real input.
#[derive(Debug, Clone, PartialEq)]
pub struct FewShotExample {
    pub formula: CnfFormula,
    pub mapping: VocabMapping,
    pub label: Verdict,
    /// Satisfying assignment for SAT examples, empty otherwise.
    pub solution: Assignment,
}

pub fn few_shot_pool() -> &'static [FewShotExample] {
    static POOL: OnceLock<Vec<FewShotExample>> = OnceLock::new();
    POOL.get_or_init(|| {
        let raw: Vec<RawExample> =
            serde_json::from_str(FEW_SHOT).expect("few-shot asset is valid JSON");
        raw.into_iter()
            .map(|r| FewShotExample {
                formula: CnfFormula::from_ints(r.items.len() as u32, &r.clauses)
                    .expect("few-shot clauses are in range"),
                mapping: VocabMapping {
                    var_to_item: r.items,
                    clause_to_person: r.persons,
                },
                label: r.label,
                solution: Assignment::try_from(r.solution).expect("few-shot solution is consistent"),
            })
            .collect()
    })
}

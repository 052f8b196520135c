//! Prompt renderings of instances and parsers for model answers.
//!
//! Three encodings are supported:
//!
//! * **SAT-CNF** prints the clause list as signed-integer triples and expects
//!   a Python dictionary `output: {1: True, ...}`.
//! * **SAT-Menu** maps variables to food items and clauses to people with
//!   likes (positive literals) and dislikes (negated literals), and expects
//!   `orderable=[...]` / `not_orderable=[...]` lists.
//! * **SAT-Translate** shows the menu preferences and asks for a LaTeX CNF
//!   expression, which is parsed back into a formula and handed to the solver.
//!
//! Both variants of the first two encodings exist: *search* asks for an
//! assignment, *decision* for a yes/no verdict. Answer grammars are documented
//! on the individual parsers.

mod answer;
mod latex;
mod menu;
mod render;
mod templates;
mod vocab;

pub use answer::{
    format_cnf_answer, format_decision_answer, format_menu_answer, last_fenced_block,
    parse_cnf_answer, parse_decision_answer, parse_menu_answer,
};
pub use latex::{latex_translation, parse_latex_cnf, LatexError};
pub use menu::{
    parse_cnf_listing, parse_preference_lines, parse_preferences, preference_line, Preference,
};
pub use render::{
    cnf_listing, render, render_cnf, render_menu, render_menu_with, render_translate,
    render_translate_with, Prompt, Rendering, INPUT_MARKER,
};
pub use templates::{few_shot_pool, identify_system_message, system_message, FewShotExample, TEMPLATE_VERSION};
pub use vocab::{VocabMapping, Vocabulary};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::Assignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    SatCnf,
    SatMenu,
    SatTranslate,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::SatCnf, Format::SatMenu, Format::SatTranslate];

    pub fn name(self) -> &'static str {
        match self {
            Format::SatCnf => "sat-cnf",
            Format::SatMenu => "sat-menu",
            Format::SatTranslate => "sat-translate",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown format {s:?} (expected sat-cnf, sat-menu or sat-translate)"))
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Decision,
    Search,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Decision, Variant::Search];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Decision => "decision",
            Variant::Search => "search",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s:?} (expected decision or search)"))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A model answer after parsing. Parsers never fail; malformed text becomes
/// [`ParsedAnswer::Unparseable`] with a reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ParsedAnswer {
    Assignment(Assignment),
    Unsat,
    DecisionYes,
    DecisionNo,
    Unparseable(String),
}

impl ParsedAnswer {
    /// The satisfiability claim implied by the answer: an assignment claims
    /// SAT, an explicit UNSAT claim or "no" claims UNSAT.
    pub fn claims_sat(&self) -> Option<bool> {
        match self {
            ParsedAnswer::Assignment(_) | ParsedAnswer::DecisionYes => Some(true),
            ParsedAnswer::Unsat | ParsedAnswer::DecisionNo => Some(false),
            ParsedAnswer::Unparseable(_) => None,
        }
    }

    /// Projects a search answer onto the decision question.
    pub fn as_decision(&self) -> ParsedAnswer {
        match self.claims_sat() {
            Some(true) => ParsedAnswer::DecisionYes,
            Some(false) => ParsedAnswer::DecisionNo,
            None => self.clone(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("vocabulary has {available} {kind}, instance needs {needed}")]
    VocabularyExhausted {
        kind: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("few-shot pool has {available} examples, {requested} requested")]
    NotEnoughShots { requested: usize, available: usize },
    #[error("SAT-Translate prompts take no variant or in-context examples")]
    UnsupportedTranslateOptions,
}

//! Prompt assembly.
//!
//! A full prompt reads
//!
//! ```text
//! # System Message
//! <system message>
//!
//! # Examples            (only when shots > 0)
//! ## Example 1
//! <input>
//! Answer:
//! <answer>
//! ...
//! # Input for a new problem
//! Formula: [[-3, 1, -4], ...]      (SAT-CNF)
//! Preferences:                     (SAT-Menu, SAT-Translate)
//! Jay: Likes nachos. Dislikes pie.
//! ```

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::answer::{format_cnf_answer, format_decision_answer, format_menu_answer};
use super::menu::preference_line;
use super::templates::{few_shot_pool, system_message, FewShotExample};
use super::{EncodingError, Format, Variant, VocabMapping, Vocabulary};
use crate::cnf::CnfFormula;
use crate::generate::Instance;
use crate::seed;

pub const INPUT_MARKER: &str = "# Input for a new problem";
const SYSTEM_HEADER: &str = "# System Message";
const FEW_SHOT_SEED: u64 = 0x5a7_f3e;

/// The two chat roles of a prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

impl Prompt {
    /// Both roles flattened into one document.
    pub fn text(&self) -> String {
        format!("{SYSTEM_HEADER}\n{}\n\n{}", self.system, self.user)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rendering {
    pub instance_id: String,
    pub format: Format,
    pub variant: Variant,
    pub shots: usize,
    pub system_message: String,
    pub user_message: String,
    pub prompt_text: String,
    /// Present for the menu-based formats.
    pub mapping: Option<VocabMapping>,
}

impl Rendering {
    pub fn prompt(&self) -> Prompt {
        Prompt {
            system: self.system_message.clone(),
            user: self.user_message.clone(),
        }
    }
}

/// `[[-3, 1, -4], [-4, -2, 1]]`
pub fn cnf_listing(formula: &CnfFormula) -> String {
    let clauses: Vec<String> = formula
        .clauses()
        .iter()
        .map(|c| {
            let lits: Vec<String> = c.to_ints().iter().map(i32::to_string).collect();
            format!("[{}]", lits.join(", "))
        })
        .collect();
    format!("[{}]", clauses.join(", "))
}

fn cnf_input(formula: &CnfFormula) -> String {
    format!("Formula: {}", cnf_listing(formula))
}

fn menu_input(formula: &CnfFormula, mapping: &VocabMapping) -> String {
    let mut out = String::from("Preferences:");
    for (clause, person) in formula.clauses().iter().zip(&mapping.clause_to_person) {
        out.push('\n');
        out.push_str(&preference_line(person, clause, mapping));
    }
    out
}

fn example_answer(ex: &FewShotExample, format: Format, variant: Variant) -> String {
    match (variant, format) {
        (Variant::Decision, _) => format_decision_answer(ex.label.is_sat()),
        (Variant::Search, Format::SatMenu) => format_menu_answer(&ex.solution, &ex.mapping),
        (Variant::Search, _) => format_cnf_answer(&ex.solution),
    }
}

fn choose_shots(instance_id: &str, shots: usize) -> Result<Vec<&'static FewShotExample>, EncodingError> {
    let pool = few_shot_pool();
    if shots > pool.len() {
        return Err(EncodingError::NotEnoughShots {
            requested: shots,
            available: pool.len(),
        });
    }
    let mut rng = seed::rng(seed::derive_seed_str(FEW_SHOT_SEED, "shots", instance_id));
    let mut picks = sample(&mut rng, pool.len(), shots).into_vec();
    picks.sort_unstable();
    Ok(picks.into_iter().map(|i| &pool[i]).collect())
}

fn user_message(
    instance_id: &str,
    format: Format,
    variant: Variant,
    shots: usize,
    input: String,
) -> Result<String, EncodingError> {
    let mut out = String::new();
    if shots > 0 {
        out.push_str("# Examples\n");
        for (i, ex) in choose_shots(instance_id, shots)?.into_iter().enumerate() {
            let ex_input = match format {
                Format::SatCnf => cnf_input(&ex.formula),
                _ => menu_input(&ex.formula, &ex.mapping),
            };
            out.push_str(&format!(
                "## Example {}\n{}\nAnswer:\n{}\n\n",
                i + 1,
                ex_input,
                example_answer(ex, format, variant)
            ));
        }
    }
    out.push_str(INPUT_MARKER);
    out.push('\n');
    out.push_str(&input);
    Ok(out)
}

fn assemble(
    inst: &Instance,
    format: Format,
    variant: Variant,
    shots: usize,
    input: String,
    mapping: Option<VocabMapping>,
) -> Result<Rendering, EncodingError> {
    let prompt = Prompt {
        system: system_message(format, variant).to_string(),
        user: user_message(&inst.id, format, variant, shots, input)?,
    };
    Ok(Rendering {
        instance_id: inst.id.clone(),
        format,
        variant,
        shots,
        prompt_text: prompt.text(),
        system_message: prompt.system,
        user_message: prompt.user,
        mapping,
    })
}

fn instance_mapping(inst: &Instance, vocab_seed: u64, vocab: &Vocabulary) -> Result<VocabMapping, EncodingError> {
    vocab.sample_mapping(
        inst.formula.num_vars() as usize,
        inst.formula.num_clauses(),
        seed::derive_seed_str(vocab_seed, "vocab", &inst.id),
    )
}

pub fn render_cnf(inst: &Instance, variant: Variant, shots: usize) -> Result<Rendering, EncodingError> {
    assemble(inst, Format::SatCnf, variant, shots, cnf_input(&inst.formula), None)
}

pub fn render_menu(
    inst: &Instance,
    variant: Variant,
    shots: usize,
    vocab_seed: u64,
) -> Result<Rendering, EncodingError> {
    render_menu_with(inst, variant, shots, vocab_seed, &Vocabulary::builtin())
}

pub fn render_menu_with(
    inst: &Instance,
    variant: Variant,
    shots: usize,
    vocab_seed: u64,
    vocab: &Vocabulary,
) -> Result<Rendering, EncodingError> {
    let mapping = instance_mapping(inst, vocab_seed, vocab)?;
    let input = menu_input(&inst.formula, &mapping);
    assemble(inst, Format::SatMenu, variant, shots, input, Some(mapping))
}

/// Translate prompts carry no examples; the variant is recorded as `Search`.
pub fn render_translate(inst: &Instance, vocab_seed: u64) -> Result<Rendering, EncodingError> {
    render_translate_with(inst, vocab_seed, &Vocabulary::builtin())
}

pub fn render_translate_with(
    inst: &Instance,
    vocab_seed: u64,
    vocab: &Vocabulary,
) -> Result<Rendering, EncodingError> {
    let mapping = instance_mapping(inst, vocab_seed, vocab)?;
    let input = menu_input(&inst.formula, &mapping);
    assemble(inst, Format::SatTranslate, Variant::Search, 0, input, Some(mapping))
}

/// Dispatches on `format`. SAT-Translate rejects shots and the decision variant.
pub fn render(
    inst: &Instance,
    format: Format,
    variant: Variant,
    shots: usize,
    vocab_seed: u64,
) -> Result<Rendering, EncodingError> {
    match format {
        Format::SatCnf => render_cnf(inst, variant, shots),
        Format::SatMenu => render_menu(inst, variant, shots, vocab_seed),
        Format::SatTranslate if shots > 0 || variant == Variant::Decision => {
            Err(EncodingError::UnsupportedTranslateOptions)
        }
        Format::SatTranslate => render_translate(inst, vocab_seed),
    }
}

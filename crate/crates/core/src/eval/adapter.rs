//! The model adapter interface and the scripted adapters.
//!
//! Scripted adapters read the rendered prompt the same way a model would: the
//! system message tells them the format and variant, the text after the last
//! input marker holds the problem. They answer in the expected output
//! grammars, so every run through them exercises the real parsers.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::http::{HttpChatAdapter, HttpChatConfig};
use crate::cnf::{Assignment, Clause, CnfFormula, Literal};
use crate::encoding::{
    format_cnf_answer, format_decision_answer, format_menu_answer, identify_system_message,
    latex_translation, parse_cnf_listing, parse_preference_lines, parse_preferences, Format,
    Prompt, Variant, VocabMapping, INPUT_MARKER,
};
use crate::seed;
use crate::solver::solve;

/// Sampling parameters sent with every request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            temperature: 1.0,
            max_tokens: 4096,
            top_p: 1.0,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// True when the counts are estimates rather than reported by the model.
    pub tokens_approximate: bool,
    /// Seconds.
    pub latency: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("credential environment variable {0} is not set")]
    MissingCredential(String),
    #[error("invalid adapter configuration: {0}")]
    InvalidConfig(String),
    #[error("endpoint unreachable after {attempts} attempts: {reason}")]
    EndpointUnreachable { attempts: u32, reason: String },
    #[error("endpoint answered HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    InvalidResponse(String),
}

pub trait ModelAdapter: Send + Sync {
    fn name(&self) -> &str;

    fn config(&self) -> GenerationConfig {
        GenerationConfig::default()
    }

    /// Adapters that cannot serve concurrent requests return true; the run
    /// loop then sends one request at a time.
    fn single_flight(&self) -> bool {
        false
    }

    fn complete(&self, prompt: &Prompt) -> Result<CompletionResult, TransportError>;
}

pub fn builtin_adapters() -> &'static [&'static str] {
    &["http_chat", "scripted_oracle", "scripted_constant", "scripted_noisy"]
}

/// Serializable adapter selection, as found in run configs and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdapterSpec {
    HttpChat(HttpChatConfig),
    ScriptedOracle,
    ScriptedConstant { answer: String },
    ScriptedNoisy { p: f64, seed: u64 },
}

impl AdapterSpec {
    pub fn build(&self) -> Result<Box<dyn ModelAdapter>, TransportError> {
        Ok(match self {
            AdapterSpec::HttpChat(cfg) => Box::new(HttpChatAdapter::new(cfg.clone())?),
            AdapterSpec::ScriptedOracle => Box::new(ScriptedAdapter::oracle()),
            AdapterSpec::ScriptedConstant { answer } => Box::new(ScriptedAdapter::constant(answer)),
            AdapterSpec::ScriptedNoisy { p, seed } => Box::new(ScriptedAdapter::noisy(*p, *seed)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptedBehavior {
    /// Always correct; answers are computed by the solver.
    Oracle,
    /// Returns the same text for every prompt.
    Constant(String),
    /// Correct with probability `p`, otherwise wrong in a well-formed way.
    /// The coin is seeded by `seed` and the prompt text.
    Noisy { p: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedAdapter {
    name: String,
    behavior: ScriptedBehavior,
}

impl ScriptedAdapter {
    pub fn oracle() -> Self {
        ScriptedAdapter {
            name: "scripted_oracle".into(),
            behavior: ScriptedBehavior::Oracle,
        }
    }

    pub fn constant(answer: &str) -> Self {
        ScriptedAdapter {
            name: format!("scripted_constant({answer})"),
            behavior: ScriptedBehavior::Constant(answer.to_string()),
        }
    }

    pub fn noisy(p: f64, seed: u64) -> Result<Self, TransportError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(TransportError::InvalidConfig(format!("noise probability {p} outside [0, 1]")));
        }
        Ok(ScriptedAdapter {
            name: format!("scripted_noisy(p={p},seed={seed})"),
            behavior: ScriptedBehavior::Noisy { p, seed },
        })
    }

    pub fn behavior(&self) -> &ScriptedBehavior {
        &self.behavior
    }

    fn answer(&self, prompt: &Prompt) -> String {
        let truthful = match &self.behavior {
            ScriptedBehavior::Constant(text) => return text.clone(),
            ScriptedBehavior::Oracle => true,
            ScriptedBehavior::Noisy { p, seed } => {
                let mut rng = seed::rng(seed::derive_seed_str(*seed, "noisy", &prompt.text()));
                rng.random_bool(*p)
            }
        };
        match Problem::decode(prompt) {
            Some(problem) => problem.answer(truthful),
            None => "I could not find a problem in this prompt.".into(),
        }
    }
}

impl ModelAdapter for ScriptedAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &Prompt) -> Result<CompletionResult, TransportError> {
        let text = self.answer(prompt);
        Ok(CompletionResult {
            prompt_tokens: whitespace_tokens(&prompt.text()),
            completion_tokens: whitespace_tokens(&text),
            tokens_approximate: true,
            latency: 0.0,
            text,
        })
    }
}

fn whitespace_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// The problem a prompt asks about, as recovered from its text.
struct Problem {
    format: Format,
    variant: Variant,
    formula: CnfFormula,
    /// Items in order of first mention, for the menu-based formats.
    mapping: Option<VocabMapping>,
}

impl Problem {
    fn decode(prompt: &Prompt) -> Option<Problem> {
        let (format, variant) = identify_system_message(&prompt.system)?;
        let input = prompt.user.rsplit(INPUT_MARKER).next()?;
        if format == Format::SatCnf {
            let clauses = parse_cnf_listing(input)?;
            let num_vars = clauses.iter().flatten().map(|l| l.unsigned_abs()).max()?;
            let formula = CnfFormula::from_ints(num_vars, &clauses).ok()?;
            return Some(Problem {
                format,
                variant,
                formula,
                mapping: None,
            });
        }
        let prefs = parse_preference_lines(input);
        let mut items: Vec<String> = Vec::new();
        for p in &prefs {
            for item in p.likes.iter().chain(&p.dislikes) {
                if !items.iter().any(|i| i.eq_ignore_ascii_case(item)) {
                    items.push(item.clone());
                }
            }
        }
        let mapping = VocabMapping {
            var_to_item: items,
            clause_to_person: prefs.into_iter().map(|p| p.person).collect(),
        };
        let formula = parse_preferences(input, &mapping).ok()?;
        Some(Problem {
            format,
            variant,
            formula,
            mapping: Some(mapping),
        })
    }

    fn answer(&self, truthful: bool) -> String {
        let result = solve(&self.formula);
        let sat = result.verdict.is_sat();
        if self.format == Format::SatTranslate {
            let mapping = self.mapping.as_ref().expect("menu formats carry a mapping");
            return latex_translation(&self.translation(truthful, sat), mapping);
        }
        let claim_sat = sat == truthful;
        if self.variant == Variant::Decision {
            return format!("After checking the clauses systematically, my answer is:\n{}", format_decision_answer(claim_sat));
        }
        let assignment = match (claim_sat, truthful) {
            (false, _) => Assignment::new(),
            (true, true) => result.witness.expect("SAT results carry a witness"),
            // Wrong SAT claim on an UNSAT formula: no assignment can be right.
            (true, false) => Assignment::from_literals((1..=self.formula.num_vars()).map(Literal::positive))
                .expect("distinct variables"),
        };
        let block = match &self.mapping {
            Some(mapping) => format_menu_answer(&assignment, mapping),
            None => format_cnf_answer(&assignment),
        };
        format!("After checking the clauses systematically, the solution is:\n\n{block}")
    }

    /// The formula a translator emits: the input itself when truthful,
    /// otherwise one whose satisfiability differs from the input's.
    fn translation(&self, truthful: bool, sat: bool) -> CnfFormula {
        if truthful {
            return self.formula.clone();
        }
        let mut clauses: Vec<Clause> = self.formula.clauses().to_vec();
        if sat {
            clauses.push(Clause::new(vec![Literal::positive(1)]));
            clauses.push(Clause::new(vec![Literal::negative(1)]));
        } else {
            clauses.truncate(1);
        }
        CnfFormula::new(self.formula.num_vars(), clauses).expect("variables stay in range")
    }
}

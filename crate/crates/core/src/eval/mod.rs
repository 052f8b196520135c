//! Model evaluation: adapters, scoring and resumable runs.
//!
//! A run renders every instance of a dataset in one format and variant, sends
//! the prompts through a [`ModelAdapter`], parses the answers, scores them
//! against the ground-truth labels and appends one [`EvalRecord`] per
//! instance to a JSON Lines file. The SAT-Translate format runs the
//! translate-then-solve pipeline instead: the answer is parsed as a LaTeX CNF
//! and the internal solver decides it.

mod adapter;
mod http;
mod run;

pub use adapter::{
    builtin_adapters, AdapterSpec, CompletionResult, GenerationConfig, ModelAdapter,
    ScriptedAdapter, ScriptedBehavior, TransportError,
};
pub use http::{HttpChatAdapter, HttpChatConfig, RetryPolicy};
pub use run::{
    read_records, run_eval, run_translate_pipeline, write_records, EvalError, EvalOptions,
};

use serde::{Deserialize, Serialize};

use crate::cnf::Status;
use crate::encoding::{Format, ParsedAnswer, Variant};
use crate::generate::Instance;

pub const EVAL_SCHEMA_VERSION: u32 = 1;

/// How an answer was scored. Everything other than `Correct` counts as wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Incorrect,
    Unparseable,
    TransportError,
}

impl Outcome {
    pub fn is_correct(self) -> bool {
        self == Outcome::Correct
    }
}

/// One scored model answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub schema_version: u32,
    pub instance_id: String,
    pub adapter: String,
    pub format: Format,
    pub variant: Variant,
    pub shots: usize,
    pub prompt_text: String,
    pub raw_response: String,
    pub parsed: ParsedAnswer,
    pub verdict: Outcome,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub tokens_approximate: bool,
    /// Seconds.
    pub latency: f64,
    /// Transport failure or translation parse error, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Scores a parsed answer against the instance's label.
///
/// Decision: the claimed satisfiability must match the label, so a search
/// answer projected onto the decision question is scored the same way.
/// Search: an assignment is correct when it satisfies the formula (it may be
/// partial); an UNSAT claim is correct on UNSAT instances.
pub fn score(inst: &Instance, parsed: &ParsedAnswer, variant: Variant) -> Outcome {
    if matches!(parsed, ParsedAnswer::Unparseable(_)) {
        return Outcome::Unparseable;
    }
    let correct = match variant {
        Variant::Decision => parsed.claims_sat() == Some(inst.label.is_sat()),
        Variant::Search => match parsed {
            ParsedAnswer::Assignment(asg) => inst.formula.evaluate(asg) == Status::Satisfied,
            ParsedAnswer::Unsat => !inst.label.is_sat(),
            _ => false,
        },
    };
    if correct {
        Outcome::Correct
    } else {
        Outcome::Incorrect
    }
}

/// Re-derives a persisted record's verdict. Transport failures stay as they are.
pub fn rescore(record: &EvalRecord, inst: &Instance) -> Outcome {
    match record.verdict {
        Outcome::TransportError => Outcome::TransportError,
        _ => score(inst, &record.parsed, record.variant),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::fixtures::worked_example;
    use crate::cnf::Assignment;
    use crate::generate::{generate, GenSpec};
    use crate::solver::Verdict;

    fn box2_instance() -> Instance {
        let mut inst = generate(&GenSpec::new(5, 2.2, 1, 1)).unwrap().remove(0);
        inst.formula = worked_example();
        inst.label = Verdict::Sat;
        inst
    }

    fn unsat_instance() -> Instance {
        let mut inst = box2_instance();
        let all: Vec<Vec<i32>> = (0..8)
            .map(|m: i32| (0..3).map(|b| if m >> b & 1 == 1 { b + 1 } else { -(b + 1) }).collect())
            .collect();
        inst.formula = crate::cnf::CnfFormula::from_ints(3, &all).unwrap();
        inst.label = Verdict::Unsat;
        inst
    }

    fn asg(lits: &[i32]) -> Assignment {
        Assignment::try_from(lits.to_vec()).unwrap()
    }

    #[test]
    fn reference_search_answer_is_correct() {
        let parsed = ParsedAnswer::Assignment(asg(&[1, 2, -3, 4, 5]));
        assert_eq!(score(&box2_instance(), &parsed, Variant::Search), Outcome::Correct);
        assert_eq!(score(&box2_instance(), &parsed, Variant::Decision), Outcome::Correct);
    }

    #[test]
    fn wrong_claims() {
        let sat = box2_instance();
        let unsat = unsat_instance();
        assert_eq!(score(&sat, &ParsedAnswer::Unsat, Variant::Search), Outcome::Incorrect);
        assert_eq!(score(&unsat, &ParsedAnswer::Unsat, Variant::Search), Outcome::Correct);
        for mask in 0..8u64 {
            let a = ParsedAnswer::Assignment(Assignment::from_mask(3, mask));
            assert_eq!(score(&unsat, &a, Variant::Search), Outcome::Incorrect);
        }
        assert_eq!(score(&sat, &ParsedAnswer::Assignment(asg(&[-1, -5])), Variant::Search), Outcome::Incorrect);
        assert_eq!(score(&sat, &ParsedAnswer::DecisionYes, Variant::Search), Outcome::Incorrect);
        assert_eq!(score(&unsat, &ParsedAnswer::DecisionNo, Variant::Decision), Outcome::Correct);
        assert_eq!(score(&unsat, &ParsedAnswer::DecisionYes, Variant::Decision), Outcome::Incorrect);
        assert_eq!(
            score(&sat, &ParsedAnswer::Unparseable("x".into()), Variant::Decision),
            Outcome::Unparseable
        );
    }

    #[test]
    fn partial_assignment_that_satisfies_every_clause() {
        let sat = box2_instance();
        let partial = ParsedAnswer::Assignment(asg(&[1, 2, 5, -3]));
        assert_eq!(score(&sat, &partial, Variant::Search), Outcome::Correct);
    }
}

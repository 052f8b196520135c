//! Answer grammars.
//!
//! Search answers are read from the last fenced code block of a response, or
//! from the whole response when no block holds the expected pattern:
//!
//! ```text
//! SAT-CNF:   output: {1: True, 2: False, ...}        empty braces claim UNSAT
//! SAT-Menu:  orderable=[pie, nachos]
//!            not_orderable=[burger]                   two empty lists claim UNSAT
//! ```
//!
//! Item names may be quoted. Decision answers are the words `yes` or `no`
//! (any case) in the last fenced block, or else on the last non-empty line;
//! exactly one of the two must appear there.

use std::sync::OnceLock;

use regex::Regex;

use super::{ParsedAnswer, VocabMapping};
use crate::cnf::{Assignment, Var};

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("valid regex"))
}

/// Body of the last complete ```` ``` ```` block, without its language tag.
pub fn last_fenced_block(text: &str) -> Option<&str> {
    let fences: Vec<usize> = text.match_indices("```").map(|(i, _)| i).collect();
    if fences.len() < 2 {
        return None;
    }
    let pairs = fences.len() / 2;
    let open = fences[2 * pairs - 2] + 3;
    let close = fences[2 * pairs - 1];
    let body = &text[open..close];
    // The rest of the opening line is a language tag.
    Some(match body.find('\n') {
        Some(nl) if !body[..nl].trim().contains(char::is_whitespace) => &body[nl + 1..],
        _ => body,
    })
}

fn search_region<'a>(text: &'a str, re: &Regex) -> &'a str {
    match last_fenced_block(text) {
        Some(block) if re.is_match(block) => block,
        _ => text,
    }
}

fn split_items(list: &str) -> Vec<&str> {
    list.split(',')
        .map(|s| s.trim().trim_matches(|c| c == '\'' || c == '"' || c == '`').trim())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn parse_menu_answer(text: &str, mapping: &VocabMapping) -> ParsedAnswer {
    static ORD: OnceLock<Regex> = OnceLock::new();
    static NOT: OnceLock<Regex> = OnceLock::new();
    let ord = regex(&ORD, r"\borderable\s*=\s*\[([^\]]*)\]");
    let not = regex(&NOT, r"\bnot_orderable\s*=\s*\[([^\]]*)\]");
    let region = search_region(text, not);
    let last = |re: &Regex| re.captures_iter(region).last().map(|c| c.get(1).map_or("", |m| m.as_str()));
    let (Some(yes), Some(no)) = (last(ord), last(not)) else {
        return ParsedAnswer::Unparseable("missing orderable/not_orderable lists".into());
    };
    let (yes, no) = (split_items(yes), split_items(no));
    if yes.is_empty() && no.is_empty() {
        return ParsedAnswer::Unsat;
    }
    let mut asg = Assignment::new();
    for (items, value) in [(yes, true), (no, false)] {
        for item in items {
            let Some(var) = mapping.var_of(item) else {
                return ParsedAnswer::Unparseable(format!("unknown item {item:?}"));
            };
            if asg.try_set(var, value).is_err() {
                return ParsedAnswer::Unparseable("item on both lists".into());
            }
        }
    }
    ParsedAnswer::Assignment(asg)
}

pub fn parse_cnf_answer(text: &str, num_vars: u32) -> ParsedAnswer {
    static OUT: OnceLock<Regex> = OnceLock::new();
    let out = regex(&OUT, r"output\s*:\s*\{([^}]*)\}");
    let region = search_region(text, out);
    let Some(body) = out.captures_iter(region).last().and_then(|c| c.get(1)) else {
        return ParsedAnswer::Unparseable("no output dictionary".into());
    };
    let mut asg = Assignment::new();
    for entry in body.as_str().split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let Some((key, value)) = entry.split_once(':') else {
            return ParsedAnswer::Unparseable(format!("malformed entry {entry:?}"));
        };
        let key = key.trim().trim_matches(|c| c == '\'' || c == '"');
        let var: Var = match key.parse() {
            Ok(v) if (1..=num_vars).contains(&v) => v,
            _ => return ParsedAnswer::Unparseable(format!("variable {key:?} outside 1..={num_vars}")),
        };
        let value = match value.trim().to_ascii_lowercase().as_str() {
            "true" => true,
            "false" => false,
            other => return ParsedAnswer::Unparseable(format!("non-boolean value {other:?}")),
        };
        if asg.try_set(var, value).is_err() {
            return ParsedAnswer::Unparseable(format!("variable {var} given both values"));
        }
    }
    if asg.is_empty() {
        ParsedAnswer::Unsat
    } else {
        ParsedAnswer::Assignment(asg)
    }
}

pub fn parse_decision_answer(text: &str) -> ParsedAnswer {
    static WORD: OnceLock<Regex> = OnceLock::new();
    let word = regex(&WORD, r"(?i)\b(yes|no)\b");
    let region = last_fenced_block(text)
        .filter(|b| !b.trim().is_empty())
        .or_else(|| text.lines().rev().find(|l| !l.trim().is_empty()))
        .unwrap_or("");
    let mut yes = false;
    let mut no = false;
    for cap in word.captures_iter(region) {
        match cap[1].to_ascii_lowercase().as_str() {
            "yes" => yes = true,
            _ => no = true,
        }
    }
    match (yes, no) {
        (true, false) => ParsedAnswer::DecisionYes,
        (false, true) => ParsedAnswer::DecisionNo,
        (true, true) => ParsedAnswer::Unparseable("both yes and no in verdict".into()),
        (false, false) => ParsedAnswer::Unparseable("no yes/no verdict".into()),
    }
}

/// A fenced SAT-CNF answer; an empty assignment claims UNSAT.
pub fn format_cnf_answer(asg: &Assignment) -> String {
    let entries: Vec<String> = asg
        .iter()
        .map(|(v, b)| format!("{v}: {}", if b { "True" } else { "False" }))
        .collect();
    format!("```python\noutput: {{{}}}\n```", entries.join(", "))
}

/// A fenced SAT-Menu answer; an empty assignment claims UNSAT.
pub fn format_menu_answer(asg: &Assignment, mapping: &VocabMapping) -> String {
    let list = |value: bool| -> String {
        asg.iter()
            .filter(|&(_, b)| b == value)
            .map(|(v, _)| mapping.item(v))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "```python\norderable=[{}]\nnot_orderable=[{}]\n```",
        list(true),
        list(false)
    )
}

pub fn format_decision_answer(sat: bool) -> String {
    if sat { "yes" } else { "no" }.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn box1_mapping() -> VocabMapping {
        VocabMapping {
            var_to_item: ["pie", "ratatouille", "nachos", "burger", "ravioli"]
                .map(String::from)
                .to_vec(),
            clause_to_person: Vec::new(),
        }
    }

    fn asg(lits: &[i32]) -> Assignment {
        Assignment::try_from(lits.to_vec()).unwrap()
    }

    #[test]
    fn reference_menu_solution() {
        let text = "So the final lists are:\n\n```python\norderable=[pie, ratatouille, nachos]\nnot_orderable=[burger, ravioli]\n```";
        assert_eq!(
            parse_menu_answer(text, &box1_mapping()),
            ParsedAnswer::Assignment(asg(&[1, 2, 3, -4, -5]))
        );
    }

    #[test]
    fn menu_edge_cases() {
        let m = box1_mapping();
        assert_eq!(parse_menu_answer("orderable=[], not_orderable=[]", &m), ParsedAnswer::Unsat);
        assert_eq!(
            parse_menu_answer("orderable=[pie], not_orderable=[pie]", &m),
            ParsedAnswer::Unparseable("item on both lists".into())
        );
        assert!(matches!(
            parse_menu_answer("orderable=['sushi'], not_orderable=[]", &m),
            ParsedAnswer::Unparseable(r) if r.contains("sushi")
        ));
        assert_eq!(
            parse_menu_answer("⟨orderable=['Pie'], not_orderable=[\"burger\"]⟩", &m),
            ParsedAnswer::Assignment(asg(&[1, -4]))
        );
        assert!(matches!(parse_menu_answer("I like pie", &m), ParsedAnswer::Unparseable(_)));
        let scratch = "first try orderable=[pie], not_orderable=[nachos]\n```\norderable=[burger]\nnot_orderable=[]\n```";
        assert_eq!(parse_menu_answer(scratch, &m), ParsedAnswer::Assignment(asg(&[4])));
    }

    #[test]
    fn reference_cnf_solutions() {
        let text = "so we return:\n\n```python\noutput: {1: True, 2: True, 3: False, 4: True, 5: True}\n```";
        assert_eq!(parse_cnf_answer(text, 5), ParsedAnswer::Assignment(asg(&[1, 2, -3, 4, 5])));
        let lazy = "the output would be an empty dictionary.\n\n```python\noutput: {}\n```";
        assert_eq!(parse_cnf_answer(lazy, 5), ParsedAnswer::Unsat);
    }

    #[test]
    fn cnf_edge_cases() {
        assert!(matches!(parse_cnf_answer("I could not solve it.", 5), ParsedAnswer::Unparseable(_)));
        assert!(matches!(parse_cnf_answer("output: {6: True}", 5), ParsedAnswer::Unparseable(_)));
        assert!(matches!(parse_cnf_answer("output: {1: True, 1: False}", 5), ParsedAnswer::Unparseable(_)));
        assert!(matches!(parse_cnf_answer("output: {1: maybe}", 5), ParsedAnswer::Unparseable(_)));
        assert_eq!(
            parse_cnf_answer("⟨output: {'2': false, 1: TRUE}⟩", 5),
            ParsedAnswer::Assignment(asg(&[1, -2]))
        );
    }

    #[test]
    fn decisions() {
        assert_eq!(parse_decision_answer("...therefore the answer is yes."), ParsedAnswer::DecisionYes);
        assert_eq!(parse_decision_answer("No."), ParsedAnswer::DecisionNo);
        assert!(matches!(parse_decision_answer("maybe"), ParsedAnswer::Unparseable(_)));
        assert!(matches!(parse_decision_answer("yes or no?"), ParsedAnswer::Unparseable(_)));
        assert!(matches!(parse_decision_answer(""), ParsedAnswer::Unparseable(_)));
        assert_eq!(parse_decision_answer("no idea at first\n\n**YES**\n\n"), ParsedAnswer::DecisionYes);
        assert_eq!(parse_decision_answer("reasoning\n```\nno\n```"), ParsedAnswer::DecisionNo);
        assert!(matches!(parse_decision_answer("Nope, unknown"), ParsedAnswer::Unparseable(_)));
    }

    #[test]
    fn fenced_blocks() {
        assert_eq!(last_fenced_block("a ```python\nx\n``` b ```\ny\n```"), Some("y\n"));
        assert_eq!(last_fenced_block("```x```"), Some("x"));
        assert_eq!(last_fenced_block("``` unterminated"), None);
    }

    #[test]
    fn formatted_answers_parse_back() {
        let a = asg(&[1, 2, -3, 4, 5]);
        assert_eq!(parse_cnf_answer(&format_cnf_answer(&a), 5), ParsedAnswer::Assignment(a.clone()));
        assert_eq!(
            parse_menu_answer(&format_menu_answer(&a, &box1_mapping()), &box1_mapping()),
            ParsedAnswer::Assignment(a)
        );
        assert_eq!(parse_cnf_answer(&format_cnf_answer(&Assignment::new()), 5), ParsedAnswer::Unsat);
        assert_eq!(parse_decision_answer(&format_decision_answer(false)), ParsedAnswer::DecisionNo);
    }

    proptest! {
        #[test]
        fn parsers_are_total(text in "\\PC{0,200}") {
            let _ = parse_cnf_answer(&text, 5);
            let _ = parse_menu_answer(&text, &box1_mapping());
            let _ = parse_decision_answer(&text);
            let _ = last_fenced_block(&text);
        }

        #[test]
        fn parsers_are_total_on_near_misses(
            text in "(```|output|: |\\{|\\}|orderable=|not_orderable=|\\[|\\]|, |pie|True|yes|no|\n|[0-9]){0,40}"
        ) {
            let _ = parse_cnf_answer(&text, 5);
            let _ = parse_menu_answer(&text, &box1_mapping());
            let _ = parse_decision_answer(&text);
        }
    }
}

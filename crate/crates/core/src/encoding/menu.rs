//! The menu preference grammar and the SAT-CNF clause listing.
//!
//! One person per line:
//!
//! ```text
//! Jay: Likes nachos, ratatouille. Dislikes pie.
//! Ada: Likes pie.
//! Zoe: Dislikes pie, burger.
//! ```
//!
//! The grammar is regular, so the preferences of a rendered prompt can be
//! mapped back to the exact CNF clause list.

use std::sync::OnceLock;

use regex::Regex;

use super::VocabMapping;
use crate::cnf::{Clause, CnfFormula, Literal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    pub person: String,
    pub likes: Vec<String>,
    pub dislikes: Vec<String>,
}

pub fn preference_line(person: &str, clause: &Clause, mapping: &VocabMapping) -> String {
    let names = |positive: bool| -> Vec<&str> {
        clause
            .literals()
            .iter()
            .filter(|l| l.polarity() == positive)
            .map(|&l| mapping.literal_text(l))
            .collect()
    };
    let (likes, dislikes) = (names(true), names(false));
    let mut line = format!("{person}:");
    if !likes.is_empty() {
        line.push_str(" Likes ");
        line.push_str(&likes.join(", "));
        line.push('.');
    }
    if !dislikes.is_empty() {
        line.push_str(" Dislikes ");
        line.push_str(&dislikes.join(", "));
        line.push('.');
    }
    line
}

fn preference_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*([A-Za-z][A-Za-z'\-]*):\s*(?:Likes ([^.]*)\.)?\s*(?:Dislikes ([^.]*)\.)?\s*$")
            .expect("valid regex")
    })
}

/// Every line of `text` that is a preference statement, in order.
pub fn parse_preference_lines(text: &str) -> Vec<Preference> {
    let split = |s: Option<regex::Match<'_>>| -> Vec<String> {
        s.map(|m| {
            m.as_str()
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
        .unwrap_or_default()
    };
    text.lines()
        .filter_map(|line| {
            let caps = preference_regex().captures(line)?;
            if caps.get(2).is_none() && caps.get(3).is_none() {
                return None;
            }
            Some(Preference {
                person: caps[1].to_string(),
                likes: split(caps.get(2)),
                dislikes: split(caps.get(3)),
            })
        })
        .collect()
}

/// Rebuilds the formula behind a block of preference lines. Each clause lists
/// its liked items before its disliked ones.
pub fn parse_preferences(text: &str, mapping: &VocabMapping) -> Result<CnfFormula, String> {
    let mut clauses = Vec::new();
    for pref in parse_preference_lines(text) {
        let mut lits = Vec::with_capacity(pref.likes.len() + pref.dislikes.len());
        for (items, positive) in [(&pref.likes, true), (&pref.dislikes, false)] {
            for item in items {
                let var = mapping
                    .var_of(item)
                    .ok_or_else(|| format!("unknown item {item:?}"))?;
                lits.push(Literal::from_var(var, positive));
            }
        }
        clauses.push(Clause::new(lits));
    }
    CnfFormula::new(mapping.num_vars(), clauses).map_err(|e| e.to_string())
}

/// Parses a Python-style list of integer lists, e.g. `[[-3, 1, -4], [5, 1, 2]]`.
pub fn parse_cnf_listing(text: &str) -> Option<Vec<Vec<i32>>> {
    let start = text.find("[[")?;
    let end = start + text[start..].find("]]")? + 2;
    let body = &text[start + 1..end - 1];
    let mut clauses = Vec::new();
    for chunk in body.split(']') {
        let chunk = chunk.trim().trim_start_matches(',').trim();
        if chunk.is_empty() {
            continue;
        }
        let inner = chunk.strip_prefix('[')?;
        let lits = inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<i32>().ok().filter(|&v| v != 0))
            .collect::<Option<Vec<_>>>()?;
        clauses.push(lits);
    }
    Some(clauses)
}

//! DIMACS CNF reader and writer.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, CnfFormula, Literal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: u32,
    },
    #[error("line {line}: header declares {declared} clauses, found {found}")]
    ClauseCountMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
}

/// Parses a DIMACS CNF document.
///
/// Comment lines start with `c`. Clauses may span lines and are terminated by
/// `0`; a trailing clause without terminator at end of input is accepted. A
/// `%` line (SATLIB convention) ends the clause section.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader {
                    line: line_no,
                    reason: "duplicate problem line".into(),
                });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((_, num_vars, _)) = header else {
            return Err(DimacsError::MalformedHeader {
                line: line_no,
                reason: "clause data before problem line".into(),
            });
        };
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                continue;
            }
            if value.unsigned_abs() > u64::from(num_vars) {
                return Err(DimacsError::LiteralOutOfRange {
                    line: line_no,
                    literal: value,
                    num_vars,
                });
            }
            current.push(Literal::new(value as i32).expect("non-zero checked above"));
        }
    }

    let Some((header_line, num_vars, declared)) = header else {
        return Err(DimacsError::MalformedHeader {
            line: last_line.max(1),
            reason: "missing problem line".into(),
        });
    };
    if !current.is_empty() {
        clauses.push(Clause::new(current));
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch {
            line: header_line,
            declared,
            found: clauses.len(),
        });
    }
    CnfFormula::new(num_vars, clauses).map_err(|e| DimacsError::MalformedHeader {
        line: header_line,
        reason: e.to_string(),
    })
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, u32, usize), DimacsError> {
    let bad = |reason: &str| DimacsError::MalformedHeader {
        line: line_no,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        ["p", "cnf", n, m] => {
            let n: u32 = n.parse().map_err(|_| bad("variable count is not an integer"))?;
            let m: usize = m.parse().map_err(|_| bad("clause count is not an integer"))?;
            if n == 0 {
                return Err(bad("variable count must be positive"));
            }
            Ok((line_no, n, m))
        }
        _ => Err(bad("expected `p cnf <vars> <clauses>`")),
    }
}

pub fn emit_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause.literals() {
            let _ = write!(out, "{} ", lit.get());
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::fixtures::worked_example;

    #[test]
    fn minimal_file() {
        let f = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(f.num_vars(), 2);
        assert_eq!(f.to_ints(), vec![vec![1, -2]]);
        assert_eq!(emit_dimacs(&f), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn contradiction_file() {
        let f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        assert_eq!(f.to_ints(), vec![vec![1], vec![-1]]);
    }

    #[test]
    fn clause_count_mismatch() {
        let err = parse_dimacs("c hello\np cnf 2 2\n1 -2 0\n").unwrap_err();
        assert_eq!(
            err,
            DimacsError::ClauseCountMismatch {
                line: 2,
                declared: 2,
                found: 1
            }
        );
    }

    #[test]
    fn out_of_range_names_line() {
        let err = parse_dimacs("p cnf 2 1\n\n1 3 0\n").unwrap_err();
        assert!(matches!(err, DimacsError::LiteralOutOfRange { line: 3, literal: 3, .. }));
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(
            parse_dimacs("p dnf 2 1\n1 0\n"),
            Err(DimacsError::MalformedHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("1 2 0\n"),
            Err(DimacsError::MalformedHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs(""),
            Err(DimacsError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(DimacsError::InvalidToken { line: 2, .. })
        ));
    }

    #[test]
    fn multi_line_clauses_and_satlib_trailer() {
        let f = parse_dimacs("p cnf 3 2\n1 2\n3 0 -1\n0\n%\n0\n").unwrap();
        assert_eq!(f.to_ints(), vec![vec![1, 2, 3], vec![-1]]);
    }

    #[test]
    fn empty_formula_emits_header_only() {
        let f = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(emit_dimacs(&f), "p cnf 3 0\n");
    }

    #[test]
    fn worked_example_header() {
        let text = emit_dimacs(&worked_example());
        assert!(text.starts_with("p cnf 5 11\n"));
        assert_eq!(parse_dimacs(&text).unwrap(), worked_example());
    }
}

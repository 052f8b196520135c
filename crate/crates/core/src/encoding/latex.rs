//! LaTeX CNF expressions over menu items.
//!
//! Accepted grammar (whitespace, `$`, `&`, `\\`, `\left`, `\right` and
//! `\begin{..}`/`\end{..}` are ignored):
//!
//! ```text
//! formula := clause (AND clause)*
//! clause  := "(" literal (OR literal)* ")" | literal
//! literal := NOT literal | item
//! item    := \text{name} | \mathrm{name} | \textit{name} | \texttt{name} | name
//! AND     := \land | \wedge | ∧
//! OR      := \lor | \vee | ∨
//! NOT     := \neg | \lnot | ¬ | ~
//! ```

use thiserror::Error;

use super::{last_fenced_block, VocabMapping};
use crate::cnf::{Clause, CnfFormula, Literal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatexError {
    #[error("parse error at character {position}: {message}")]
    ParseError { position: usize, message: String },
    #[error("unknown item {0:?}")]
    UnknownItem(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    And,
    Or,
    Not,
    Item(String),
}

fn parse_error(position: usize, message: impl Into<String>) -> LatexError {
    LatexError::ParseError {
        position,
        message: message.into(),
    }
}

const TEXT_COMMANDS: [&str; 5] = ["text", "mathrm", "textit", "texttt", "textrm"];

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, LatexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let braced = |start: usize| -> Result<(String, usize), LatexError> {
        if chars.get(start) != Some(&'{') {
            return Err(parse_error(start, "expected '{'"));
        }
        let close = chars[start..]
            .iter()
            .position(|&c| c == '}')
            .ok_or_else(|| parse_error(start, "unclosed '{'"))?;
        let inner: String = chars[start + 1..start + close].iter().collect();
        Ok((inner, start + close + 1))
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() || matches!(c, '$' | '&' | ',' | '.') => i += 1,
            '(' | '[' => {
                tokens.push((i, Token::Open));
                i += 1;
            }
            ')' | ']' => {
                tokens.push((i, Token::Close));
                i += 1;
            }
            '∧' => {
                tokens.push((i, Token::And));
                i += 1;
            }
            '∨' => {
                tokens.push((i, Token::Or));
                i += 1;
            }
            '¬' | '~' => {
                tokens.push((i, Token::Not));
                i += 1;
            }
            '\\' => {
                let start = i;
                i += 1;
                let name_len = chars[i..].iter().take_while(|c| c.is_ascii_alphabetic()).count();
                let name: String = chars[i..i + name_len].iter().collect();
                i += name_len;
                match name.as_str() {
                    "" => i += 1, // `\\`, `\,`, `\;`, `\_` outside a text group
                    "land" | "wedge" => tokens.push((start, Token::And)),
                    "lor" | "vee" => tokens.push((start, Token::Or)),
                    "neg" | "lnot" => tokens.push((start, Token::Not)),
                    "left" | "right" | "quad" | "qquad" | "displaystyle" => {}
                    "begin" | "end" => i = braced(i)?.1,
                    n if TEXT_COMMANDS.contains(&n) => {
                        let (inner, next) = braced(i)?;
                        let item = inner.replace("\\_", "_").trim().to_string();
                        if item.is_empty() {
                            return Err(parse_error(start, "empty item name"));
                        }
                        tokens.push((start, Token::Item(item)));
                        i = next;
                    }
                    other => return Err(parse_error(start, format!("unsupported command \\{other}"))),
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let len = chars[i..]
                    .iter()
                    .take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-'))
                    .count();
                tokens.push((i, Token::Item(chars[i..i + len].iter().collect())));
                i += len;
            }
            other => return Err(parse_error(i, format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    mapping: &'a VocabMapping,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn literal(&mut self) -> Result<Literal, LatexError> {
        let position = self.here();
        match self.tokens.get(self.pos).map(|(_, t)| t.clone()) {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(-self.literal()?)
            }
            Some(Token::Item(name)) => {
                self.pos += 1;
                let var = self
                    .mapping
                    .var_of(&name)
                    .ok_or(LatexError::UnknownItem(name))?;
                Ok(Literal::positive(var))
            }
            Some(_) => Err(parse_error(position, "expected an item or negation")),
            None => Err(parse_error(position, "unexpected end of expression")),
        }
    }

    fn clause(&mut self) -> Result<Clause, LatexError> {
        if self.peek() != Some(&Token::Open) {
            return Ok(Clause::new(vec![self.literal()?]));
        }
        self.pos += 1;
        let mut lits = vec![self.literal()?];
        loop {
            match self.peek() {
                Some(Token::Or) => {
                    self.pos += 1;
                    lits.push(self.literal()?);
                }
                Some(Token::Close) => {
                    self.pos += 1;
                    return Ok(Clause::new(lits));
                }
                _ => return Err(parse_error(self.here(), "expected OR or ')'")),
            }
        }
    }

    fn formula(&mut self) -> Result<Vec<Clause>, LatexError> {
        if self.tokens.is_empty() {
            return Err(parse_error(0, "empty expression"));
        }
        let mut clauses = vec![self.clause()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            clauses.push(self.clause()?);
        }
        if self.pos < self.tokens.len() {
            return Err(parse_error(self.here(), "expected AND or end of expression"));
        }
        Ok(clauses)
    }
}

/// Parses a translated CNF into a formula over `mapping`'s variables. When the
/// text holds a fenced code block, only the last block is read; character
/// positions in errors are relative to the text actually parsed.
pub fn parse_latex_cnf(text: &str, mapping: &VocabMapping) -> Result<CnfFormula, LatexError> {
    let src = last_fenced_block(text).unwrap_or(text);
    let mut parser = Parser {
        tokens: tokenize(src)?,
        pos: 0,
        mapping,
        end: src.chars().count(),
    };
    let clauses = parser.formula()?;
    CnfFormula::new(mapping.num_vars(), clauses).map_err(|e| parse_error(0, e.to_string()))
}

/// The correct translation of `formula`, in the style
/// `(\text{naan} \lor \neg \text{tandoori}) \land (...)`.
pub fn latex_translation(formula: &CnfFormula, mapping: &VocabMapping) -> String {
    formula
        .clauses()
        .iter()
        .map(|c| {
            let lits: Vec<String> = c
                .literals()
                .iter()
                .map(|&l| {
                    let item = format!("\\text{{{}}}", mapping.literal_text(l));
                    if l.polarity() {
                        item
                    } else {
                        format!("\\neg {item}")
                    }
                })
                .collect();
            format!("({})", lits.join(" \\lor "))
        })
        .collect::<Vec<_>>()
        .join(" \\land ")
}

//! Line-based machine description format.
//!
//! ```text
//! # Hospital client
//! machine m_c
//! initial q1
//! q1 ! nd q2
//! q1 ! pr q2
//! q2 ? ok q1
//! q2 ? ko q1
//! ```
//!
//! A file holds one or more `machine` blocks. Identifiers are
//! `[A-Za-z0-9_]+`; `#` starts a comment.

use std::fmt::Write as _;

use thiserror::Error;

use crate::machine::{Action, Machine, RawMachine, StateId, ValidationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("machine {name}: {source}")]
    Invalid {
        name: String,
        #[source]
        source: ValidationError,
    },
    #[error("expected exactly one machine, found {0}")]
    MachineCount(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedMachine {
    pub name: String,
    pub machine: Machine,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in code.char_indices().chain(std::iter::once((code.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &code[s..i],
                    col: code[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Block {
    name: String,
    line: usize,
    initial: Option<StateId>,
    transitions: Vec<(StateId, Action, StateId)>,
}

impl Block {
    fn finish(self) -> Result<NamedMachine, ParseError> {
        let Some(initial) = self.initial else {
            return Err(ParseError::Syntax {
                line: self.line,
                col: 1,
                message: format!("machine {} has no initial line", self.name),
            });
        };
        let raw = RawMachine {
            initial: Some(initial),
            states: None,
            transitions: self.transitions,
        };
        let machine = raw.validate().map_err(|source| ParseError::Invalid {
            name: self.name.clone(),
            source,
        })?;
        Ok(NamedMachine { name: self.name, machine })
    }
}

/// Parses every machine block in `text`.
pub fn parse(text: &str) -> Result<Vec<NamedMachine>, ParseError> {
    let mut done = Vec::new();
    let mut current: Option<Block> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokens(line);
        let Some(first) = toks.first() else { continue };
        let err = |col: usize, message: String| ParseError::Syntax { line: line_no, col, message };
        for t in &toks {
            if !is_ident(t.text) && t.text != "!" && t.text != "?" {
                return Err(err(t.col, format!("unexpected token {:?}", t.text)));
            }
        }
        match first.text {
            "machine" => {
                if toks.len() != 2 || !is_ident(toks[1].text) {
                    return Err(err(first.col, "expected `machine <name>`".into()));
                }
                if let Some(block) = current.take() {
                    done.push(block.finish()?);
                }
                current = Some(Block {
                    name: toks[1].text.to_string(),
                    line: line_no,
                    initial: None,
                    transitions: Vec::new(),
                });
            }
            "initial" => {
                let Some(block) = current.as_mut() else {
                    return Err(err(first.col, "`initial` outside a machine block".into()));
                };
                if toks.len() != 2 || !is_ident(toks[1].text) {
                    return Err(err(first.col, "expected `initial <state>`".into()));
                }
                if block.initial.is_some() {
                    return Err(err(first.col, "duplicate `initial` line".into()));
                }
                block.initial = Some(StateId::new(toks[1].text));
            }
            _ => {
                let Some(block) = current.as_mut() else {
                    return Err(err(first.col, "transition outside a machine block".into()));
                };
                if toks.len() != 4 {
                    return Err(err(first.col, "expected `<state> !|? <message> <state>`".into()));
                }
                let action = match toks[1].text {
                    "!" => Action::send(toks[2].text),
                    "?" => Action::receive(toks[2].text),
                    other => return Err(err(toks[1].col, format!("expected `!` or `?`, found {other:?}"))),
                };
                for t in [&toks[0], &toks[2], &toks[3]] {
                    if !is_ident(t.text) {
                        return Err(err(t.col, format!("expected an identifier, found {:?}", t.text)));
                    }
                }
                block
                    .transitions
                    .push((StateId::new(toks[0].text), action, StateId::new(toks[3].text)));
            }
        }
    }
    match current {
        Some(block) => done.push(block.finish()?),
        None if done.is_empty() => {
            return Err(ParseError::Syntax {
                line: 1,
                col: 1,
                message: "no machine block".into(),
            })
        }
        None => {}
    }
    Ok(done)
}

/// Parses a file that must contain exactly one machine.
pub fn parse_one(text: &str) -> Result<NamedMachine, ParseError> {
    let mut all = parse(text)?;
    if all.len() != 1 {
        return Err(ParseError::MachineCount(all.len()));
    }
    Ok(all.remove(0))
}

/// Renders `machine` with transitions in sorted order.
pub fn serialize(name: &str, machine: &Machine) -> String {
    let mut out = String::new();
    writeln!(out, "machine {name}").unwrap();
    writeln!(out, "initial {}", machine.initial()).unwrap();
    for (from, action, to) in machine.transitions() {
        writeln!(
            out,
            "{from} {} {} {to}",
            action.direction.symbol(),
            action.message
        )
        .unwrap();
    }
    out
}

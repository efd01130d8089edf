//! Statements in the constrained `X is Y` language and candidate chains.
//!
//! Three surface forms are accepted:
//!
//! * `X is Y.`
//! * `Therefore, X is Y.` (the comma and final period are optional)
//! * `X | is | Y`
//!
//! Entities are canonicalized by lowercasing, trimming and collapsing inner
//! whitespace. The copula `is` is the only relation.

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COPULA: &str = "is";

static SENTENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)^(.+?)\s+is\s+(.+?)\s*\.?$").unwrap());

fn strip_conclusion_marker(text: &str) -> &str {
    const MARKER: &str = "therefore";
    match text.get(..MARKER.len()) {
        Some(head) if head.eq_ignore_ascii_case(MARKER) => {
            let rest = &text[MARKER.len()..];
            if rest.starts_with(|c: char| c == ',' || c.is_whitespace()) {
                rest.trim_start_matches(|c: char| c == ',' || c.is_whitespace())
            } else {
                text
            }
        }
        _ => text,
    }
}

/// One atomic assertion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    pub id: usize,
    pub text: String,
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl Statement {
    /// Canonical template form, `subject is object.`; parses back to the same triple.
    pub fn render(&self) -> String {
        format!("{} {} {}.", self.subject, self.relation, self.object)
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Lowercase, trim and collapse runs of whitespace to one space.
pub fn canonicalize(entity: &str) -> String {
    entity
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_statement(text: &str) -> Result<Statement> {
    parse_statement_with_id(0, text)
}

pub fn parse_statement_with_id(id: usize, text: &str) -> Result<Statement> {
    let trimmed = text.trim();
    let err = || Error::Parse {
        text: text.to_string(),
    };

    let (subject, relation, object) = if trimmed.contains('|') {
        let parts: Vec<&str> = trimmed.split('|').collect();
        if parts.len() != 3 {
            return Err(err());
        }
        let object = parts[2].trim();
        let object = object.strip_suffix('.').unwrap_or(object);
        (
            canonicalize(parts[0]),
            canonicalize(parts[1]),
            canonicalize(object),
        )
    } else {
        let caps = SENTENCE
            .captures(strip_conclusion_marker(trimmed))
            .ok_or_else(err)?;
        (
            canonicalize(&caps[1]),
            COPULA.to_string(),
            canonicalize(&caps[2]),
        )
    };

    let is_entity = |e: &str| e.chars().any(char::is_alphanumeric);
    if !is_entity(&subject) || !is_entity(&object) || relation != COPULA {
        return Err(err());
    }
    Ok(Statement {
        id,
        text: trimmed.to_string(),
        subject,
        relation,
        object,
    })
}

/// Parse a list of sentences, numbering them in order. On failure returns the
/// 1-based positions of every offending entry.
pub fn parse_all<S: AsRef<str>>(texts: &[S]) -> std::result::Result<Vec<Statement>, Vec<usize>> {
    let mut out = Vec::with_capacity(texts.len());
    let mut bad = Vec::new();
    for (i, t) in texts.iter().enumerate() {
        match parse_statement_with_id(i, t.as_ref()) {
            Ok(s) => out.push(s),
            Err(_) => bad.push(i + 1),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(bad)
    }
}

/// A directed evaluation edge between steps. `from == ANCHOR` links the
/// context to the first step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Junction {
    pub from: isize,
    pub to: usize,
}

impl Junction {
    pub const ANCHOR: isize = -1;

    pub fn is_anchor(&self) -> bool {
        self.from == Self::ANCHOR
    }
}

impl fmt::Display for Junction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateChain {
    pub steps: Vec<Statement>,
    pub junctions: Vec<Junction>,
}

impl CandidateChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Junctions are the context anchor `(-1, 0)` followed by every adjacent pair.
///
/// `context_len` is accepted for symmetry with the gate's inputs; junction
/// indices never point into the context.
pub fn build_chain(_context_len: usize, steps: Vec<Statement>) -> Result<CandidateChain> {
    if steps.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    let mut junctions = Vec::with_capacity(steps.len());
    junctions.push(Junction {
        from: Junction::ANCHOR,
        to: 0,
    });
    for k in 1..steps.len() {
        junctions.push(Junction {
            from: (k - 1) as isize,
            to: k,
        });
    }
    Ok(CandidateChain { steps, junctions })
}
